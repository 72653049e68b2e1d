//! Stage-2 taxonomy mapping.
//!
//! System events map straight from their task code. State deltas map by priority:
//!
//! 1. removal → `Prune_<group>`
//! 2. appearance → `Create_*` (connectors: `Relate`)
//! 3. endpoint change on a connector → `Relate`
//! 4. child-list change on a container → `Structure`
//! 5. more reactions or comments → `Interact_*`
//! 6. any other change on a live connector → `Relate`
//! 7. text length change → `Elaborate_<group>_<magnitude>`, plus `Relocate_*` when the same
//!    snapshot also moved the artifact
//! 8. displacement → `Relocate_<group>_<magnitude>`
//!
//! Anything else (pure resize, social decreases, no change) yields no action.

use crate::abstraction::delta::StateDelta;
use crate::abstraction::magnitude::{quantize_magnitude, Thresholds};
use crate::error::{Error, Result};
use crate::ingest::{EventKind, RawEvent, SystemCode};
use crate::model::{ActionCategory, ArtifactGroup, ArtifactKind, Condition, DesignAction, Subtype};

fn reject(event: &RawEvent, reason: impl Into<String>) -> Error {
    Error::Classification {
        line: event.source_line,
        reason: reason.into(),
    }
}

fn action(event: &RawEvent, subtype: Subtype) -> DesignAction {
    let mut a = DesignAction::new(
        event.designer_id.clone(),
        event.condition,
        event.task.clone(),
        event.timestamp,
        subtype,
    );
    a.artifact_id = event.artifact_id.clone();
    a
}

/// Classify one clean event. Returns zero, one or (move + edit) two actions.
pub fn classify(
    event: &RawEvent,
    delta: Option<&StateDelta>,
    thresholds: &Thresholds,
) -> Result<Vec<DesignAction>> {
    match event.event_kind {
        EventKind::SystemEvent => {
            if delta.is_some() {
                return Err(reject(event, "system event carries a state delta"));
            }
            classify_system(event).map(|a| vec![a])
        }
        EventKind::StateSnapshot => {
            let delta = delta.ok_or_else(|| reject(event, "state snapshot without a delta"))?;
            classify_state(event, delta, thresholds)
        }
    }
}

fn classify_system(event: &RawEvent) -> Result<DesignAction> {
    let code = event
        .system_code
        .ok_or_else(|| reject(event, "system event without system_code"))?;
    let subtype = match code {
        SystemCode::AgentGen => {
            if event.condition != Condition::AgentOrganizer {
                return Err(reject(
                    event,
                    "agent_gen outside the agent-organizer condition",
                ));
            }
            Subtype::system(ActionCategory::AgentGen)?
        }
        SystemCode::PromptGen => Subtype::system(ActionCategory::PromptGen)?,
        SystemCode::ImageEdit => Subtype::system(ActionCategory::ImageEdit)?,
        SystemCode::IntentEditGlobal => Subtype::intent_edit(true),
        SystemCode::IntentEditLocal => Subtype::intent_edit(false),
    };
    let mut a = action(event, subtype);
    a.artifact_id = None;
    Ok(a)
}

fn classify_state(
    event: &RawEvent,
    delta: &StateDelta,
    thresholds: &Thresholds,
) -> Result<Vec<DesignAction>> {
    let kind = event
        .artifact_kind
        .ok_or_else(|| reject(event, "state delta on an unknown artifact kind"))?;
    let group = kind.group();
    let is_connector = group == ArtifactGroup::Relation;

    let quantized = |category: ActionCategory, value: f64| -> Result<DesignAction> {
        let triple = match category {
            ActionCategory::Relocate => &thresholds.relocate,
            _ => &thresholds.elaborate,
        };
        let magnitude = quantize_magnitude(value, triple);
        let mut a = action(event, Subtype::quantized(category, group, magnitude)?);
        a.raw_magnitude = Some(value);
        Ok(a)
    };

    let one = |subtype: Subtype| Ok(vec![action(event, subtype)]);

    if delta.removal {
        return one(Subtype::prune(group));
    }
    if delta.appearance {
        return if is_connector {
            one(Subtype::relate())
        } else {
            one(Subtype::create(kind)?)
        };
    }
    if delta.relation_change && kind == ArtifactKind::Connector {
        return one(Subtype::relate());
    }
    if delta.container_change && group == ArtifactGroup::Container {
        return one(Subtype::structure());
    }
    if delta.social_increase() {
        return one(Subtype::interact(delta.delta_comments > 0));
    }
    if is_connector {
        return if delta.delta_char != 0 || delta.delta_pos > 0.0 {
            one(Subtype::relate())
        } else {
            Ok(vec![])
        };
    }
    let mut out = Vec::new();
    if delta.delta_char != 0 {
        out.push(quantized(
            ActionCategory::Elaborate,
            delta.delta_char.unsigned_abs() as f64,
        )?);
    }
    if delta.delta_pos > 0.0 {
        out.push(quantized(ActionCategory::Relocate, delta.delta_pos)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ArtifactState;
    use crate::model::Magnitude;
    use proptest::prelude::*;

    fn snapshot(kind: ArtifactKind) -> RawEvent {
        RawEvent {
            timestamp: 1000,
            designer_id: "D1".into(),
            condition: Condition::AgentOrganizer,
            task: "space".into(),
            event_kind: EventKind::StateSnapshot,
            artifact_id: Some("a1".into()),
            artifact_kind: Some(kind),
            state: Some(ArtifactState::at(0.0, 0.0)),
            system_code: None,
            tag: None,
            source_line: 1,
        }
    }

    fn system(code: SystemCode, condition: Condition) -> RawEvent {
        RawEvent {
            event_kind: EventKind::SystemEvent,
            artifact_id: None,
            artifact_kind: None,
            state: None,
            system_code: Some(code),
            condition,
            ..snapshot(ArtifactKind::Note)
        }
    }

    fn names(actions: &[DesignAction]) -> Vec<String> {
        actions.iter().map(|a| a.subtype.name()).collect()
    }

    #[test]
    fn agent_image_appearance() {
        let d = StateDelta {
            appearance: true,
            ..Default::default()
        };
        let out = classify(
            &snapshot(ArtifactKind::AgentImage),
            Some(&d),
            &Thresholds::paper(),
        )
        .unwrap();
        assert_eq!(names(&out), ["Create_inspiration_agent"]);
        assert_eq!(out[0].category, ActionCategory::Create);
    }

    #[test]
    fn relocate_small() {
        let d = StateDelta {
            delta_pos: 100.0,
            ..Default::default()
        };
        let out = classify(
            &snapshot(ArtifactKind::Image),
            Some(&d),
            &Thresholds::paper(),
        )
        .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].category, ActionCategory::Relocate);
        assert_eq!(out[0].magnitude, Magnitude::Small);
        assert_eq!(out[0].raw_magnitude, Some(100.0));
        assert_eq!(names(&out), ["Relocate_inspiration_small"]);
    }

    #[test]
    fn system_codes() {
        let t = Thresholds::paper();
        let cases = [
            (SystemCode::AgentGen, "Agent_gen", ActionCategory::AgentGen),
            (
                SystemCode::PromptGen,
                "Prompt_gen",
                ActionCategory::PromptGen,
            ),
            (
                SystemCode::ImageEdit,
                "Image_edit",
                ActionCategory::ImageEdit,
            ),
            (
                SystemCode::IntentEditGlobal,
                "Intent_edit_global",
                ActionCategory::IntentEdit,
            ),
            (
                SystemCode::IntentEditLocal,
                "Intent_edit_local",
                ActionCategory::IntentEdit,
            ),
        ];
        for (code, name, cat) in cases {
            let out = classify(&system(code, Condition::AgentOrganizer), None, &t).unwrap();
            assert_eq!(names(&out), [name]);
            assert_eq!(out[0].category, cat);
            assert_eq!(out[0].magnitude, Magnitude::NotApplicable);
        }
    }

    #[test]
    fn agent_gen_only_under_agent_condition() {
        let err = classify(
            &system(SystemCode::AgentGen, Condition::Baseline),
            None,
            &Thresholds::paper(),
        );
        assert!(err.is_err());
        assert!(classify(
            &system(SystemCode::PromptGen, Condition::Baseline),
            None,
            &Thresholds::paper()
        )
        .is_ok());
    }

    #[test]
    fn contract_violations() {
        let t = Thresholds::paper();
        let d = StateDelta::default();
        assert!(classify(
            &system(SystemCode::PromptGen, Condition::Baseline),
            Some(&d),
            &t
        )
        .is_err());
        assert!(classify(&snapshot(ArtifactKind::Note), None, &t).is_err());
        let mut unknown = snapshot(ArtifactKind::Note);
        unknown.artifact_kind = None;
        assert!(classify(
            &unknown,
            Some(&StateDelta {
                delta_pos: 3.0,
                ..d
            }),
            &t
        )
        .is_err());
    }

    #[test]
    fn move_and_edit_co_emit() {
        let d = StateDelta {
            delta_char: -20,
            delta_pos: 900.0,
            ..Default::default()
        };
        let out = classify(
            &snapshot(ArtifactKind::Note),
            Some(&d),
            &Thresholds::paper(),
        )
        .unwrap();
        assert_eq!(
            names(&out),
            ["Elaborate_inspiration_medium", "Relocate_inspiration_large"]
        );
    }

    #[test]
    fn connectors_are_relate() {
        let t = Thresholds::paper();
        for d in [
            StateDelta {
                appearance: true,
                ..Default::default()
            },
            StateDelta {
                relation_change: true,
                ..Default::default()
            },
            StateDelta {
                delta_char: 4,
                ..Default::default()
            },
            StateDelta {
                delta_pos: 12.0,
                ..Default::default()
            },
        ] {
            assert_eq!(
                names(&classify(&snapshot(ArtifactKind::Connector), Some(&d), &t).unwrap()),
                ["Relate"]
            );
        }
        let removed = StateDelta {
            removal: true,
            ..Default::default()
        };
        assert_eq!(
            names(&classify(&snapshot(ArtifactKind::Connector), Some(&removed), &t).unwrap()),
            ["Prune_relation"]
        );
    }

    #[test]
    fn containers_structure_and_create() {
        let t = Thresholds::paper();
        let d = StateDelta {
            container_change: true,
            delta_pos: 10.0,
            ..Default::default()
        };
        assert_eq!(
            names(&classify(&snapshot(ArtifactKind::Column), Some(&d), &t).unwrap()),
            ["Structure"]
        );
        let d = StateDelta {
            appearance: true,
            ..Default::default()
        };
        assert_eq!(
            names(&classify(&snapshot(ArtifactKind::Table), Some(&d), &t).unwrap()),
            ["Create_structure_table"]
        );
        let d = StateDelta {
            appearance: true,
            ..Default::default()
        };
        assert_eq!(
            names(&classify(&snapshot(ArtifactKind::TodoList), Some(&d), &t).unwrap()),
            ["Create_control"]
        );
    }

    #[test]
    fn social_and_non_significant() {
        let t = Thresholds::paper();
        let note = snapshot(ArtifactKind::Note);
        let d = StateDelta {
            delta_comments: 1,
            delta_reactions: 1,
            ..Default::default()
        };
        assert_eq!(
            names(&classify(&note, Some(&d), &t).unwrap()),
            ["Interact_comment_create"]
        );
        let d = StateDelta {
            delta_reactions: 2,
            ..Default::default()
        };
        assert_eq!(
            names(&classify(&note, Some(&d), &t).unwrap()),
            ["Interact_reaction"]
        );
        let resize = StateDelta {
            delta_size: (10.0, -3.0),
            ..Default::default()
        };
        assert!(classify(&note, Some(&resize), &t).unwrap().is_empty());
        assert!(classify(&note, Some(&StateDelta::default()), &t)
            .unwrap()
            .is_empty());
    }

    /// Reference decision list, written independently of `classify_state`.
    fn expected_category(kind: ArtifactKind, d: &StateDelta) -> Vec<ActionCategory> {
        use ActionCategory::*;
        let connector = kind == ArtifactKind::Connector;
        let container = matches!(kind, ArtifactKind::Column | ArtifactKind::Table);
        let rules: [(bool, Vec<ActionCategory>); 7] = [
            (d.removal, vec![Prune]),
            (d.appearance, vec![if connector { Relate } else { Create }]),
            (d.relation_change && connector, vec![Relate]),
            (d.container_change && container, vec![Structure]),
            (
                d.delta_reactions > 0 || d.delta_comments > 0,
                vec![Interact],
            ),
            (
                connector && (d.delta_char != 0 || d.delta_pos > 0.0),
                vec![Relate],
            ),
            (
                !connector && (d.delta_char != 0 || d.delta_pos > 0.0),
                [
                    (d.delta_char != 0, Elaborate),
                    (d.delta_pos > 0.0, Relocate),
                ]
                .into_iter()
                .filter_map(|(on, c)| on.then_some(c))
                .collect(),
            ),
        ];
        rules
            .into_iter()
            .find(|(on, _)| *on)
            .map(|(_, c)| c)
            .unwrap_or_default()
    }

    fn arb_delta() -> impl Strategy<Value = StateDelta> {
        (
            any::<u8>(),
            -60i64..60,
            0.0f64..2000.0,
            0u32..3,
            0u32..3,
            any::<bool>(),
            any::<bool>(),
        )
            .prop_map(|(flags, dc, dp, dr, dcm, rel, cont)| {
                let appearance = flags % 5 == 0;
                let removal = !appearance && flags % 7 == 0;
                StateDelta {
                    appearance,
                    removal,
                    delta_char: if flags % 2 == 0 { dc } else { 0 },
                    delta_size: (0.0, 0.0),
                    delta_pos: if flags % 3 == 0 { dp } else { 0.0 },
                    delta_reactions: dr,
                    delta_comments: dcm,
                    relation_change: rel,
                    container_change: cont,
                }
            })
    }

    proptest! {
        #[test]
        fn priority_order_is_deterministic(kind_ix in 0usize..8, d in arb_delta()) {
            let kind = ArtifactKind::ALL[kind_ix];
            let out = classify(&snapshot(kind), Some(&d), &Thresholds::paper()).unwrap();
            let cats: Vec<ActionCategory> = out.iter().map(|a| a.category).collect();
            prop_assert_eq!(cats, expected_category(kind, &d));
        }

        #[test]
        fn system_events_ignore_thresholds(code_ix in 0usize..5, q in 1.0f64..1e6) {
            let codes = [
                SystemCode::AgentGen,
                SystemCode::PromptGen,
                SystemCode::ImageEdit,
                SystemCode::IntentEditGlobal,
                SystemCode::IntentEditLocal,
            ];
            let ev = system(codes[code_ix], Condition::AgentOrganizer);
            let odd = crate::abstraction::magnitude::QuartileTriple::new(q, q, q).unwrap();
            let weird = Thresholds { relocate: odd, elaborate: odd };
            prop_assert_eq!(
                classify(&ev, None, &Thresholds::paper()).unwrap(),
                classify(&ev, None, &weird).unwrap()
            );
        }
    }
}
