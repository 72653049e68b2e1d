//! Fixtures shared by the benchmarks.

use designseq_core::abstraction::{abstract_stream, CleaningConfig, Thresholds};
use designseq_core::ingest::{partition_streams, EventStream};
use designseq_core::model::DesignAction;
use designseq_core::synth::{generate, preset_paper_like, GeneratorParams, SynthOutput};
use designseq_core::timeline::{sessionize, Session, TimelineBasis, DEFAULT_GAP_CUTOFF_MS};

pub fn params(designers: usize, session_length: usize) -> GeneratorParams {
    GeneratorParams {
        seed: 1,
        designers,
        session_length,
        ..preset_paper_like()
    }
}

pub fn synthetic(designers: usize, session_length: usize) -> SynthOutput {
    generate(&params(designers, session_length)).expect("preset is valid")
}

pub fn streams(designers: usize, session_length: usize) -> Vec<EventStream> {
    partition_streams(synthetic(designers, session_length).events)
}

pub fn abstract_all(streams: &[EventStream]) -> Vec<DesignAction> {
    let (cfg, t) = (CleaningConfig::default(), Thresholds::paper());
    streams
        .iter()
        .flat_map(|s| abstract_stream(s, &cfg, &t).actions)
        .collect()
}

pub fn sessions(designers: usize, session_length: usize) -> Vec<Session> {
    let actions = abstract_all(&streams(designers, session_length));
    sessionize(actions, DEFAULT_GAP_CUTOFF_MS, &TimelineBasis::Actions)
        .expect("sorted synthetic actions")
}
