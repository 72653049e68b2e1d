use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::ArtifactState;

/// Field-wise difference between consecutive snapshots of one artifact.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StateDelta {
    pub appearance: bool,
    pub removal: bool,
    pub delta_char: i64,
    pub delta_size: (f64, f64),
    pub delta_pos: f64,
    pub delta_reactions: u32,
    pub delta_comments: u32,
    pub relation_change: bool,
    pub container_change: bool,
}

impl StateDelta {
    pub fn is_zero(&self) -> bool {
        *self == StateDelta::default()
    }

    pub fn social_increase(&self) -> bool {
        self.delta_reactions > 0 || self.delta_comments > 0
    }
}

/// A deleted snapshot counts as an absent artifact on either side.
pub fn detect_delta(
    prev: Option<&ArtifactState>,
    curr: Option<&ArtifactState>,
) -> Result<StateDelta> {
    if prev.is_none() && curr.is_none() {
        return Err(Error::NoStates);
    }
    let prev = prev.filter(|s| !s.deleted);
    let live_curr = curr.filter(|s| !s.deleted);
    let (prev, curr) = match (prev, live_curr) {
        (None, None) => return Ok(StateDelta::default()),
        (None, Some(_)) => {
            return Ok(StateDelta {
                appearance: true,
                ..Default::default()
            })
        }
        (Some(_), None) => {
            return Ok(StateDelta {
                removal: true,
                ..Default::default()
            })
        }
        (Some(p), Some(c)) => (p, c),
    };

    let dx = curr.position.x - prev.position.x;
    let dy = curr.position.y - prev.position.y;
    let (pw, ph) = prev.size.map_or((0.0, 0.0), |s| (s.width, s.height));
    let (cw, ch) = curr.size.map_or((0.0, 0.0), |s| (s.width, s.height));
    let increase = |a: Option<u32>, b: Option<u32>| b.unwrap_or(0).saturating_sub(a.unwrap_or(0));

    Ok(StateDelta {
        appearance: false,
        removal: false,
        delta_char: curr.text_len() - prev.text_len(),
        delta_size: (cw - pw, ch - ph),
        delta_pos: dx.hypot(dy),
        delta_reactions: increase(prev.reaction_count, curr.reaction_count),
        delta_comments: increase(prev.comment_count, curr.comment_count),
        relation_change: prev.start_id != curr.start_id || prev.end_id != curr.end_id,
        container_change: prev.child_ids != curr.child_ids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Size;

    #[test]
    fn euclidean_displacement() {
        let a = ArtifactState::at(0.0, 0.0);
        let b = ArtifactState::at(3.0, 4.0);
        let d = detect_delta(Some(&a), Some(&b)).unwrap();
        assert_eq!(d.delta_pos, (9.0f64 + 16.0).sqrt());
        assert_eq!(d.delta_pos, 5.0);
        assert!(!d.appearance && !d.removal);
    }

    #[test]
    fn identical_states_give_zero_delta() {
        let mut a = ArtifactState::at(10.0, -4.0);
        a.text = Some("hello".into());
        a.size = Some(Size {
            width: 10.0,
            height: 20.0,
        });
        a.child_ids = Some(vec!["x".into()]);
        assert!(detect_delta(Some(&a), Some(&a.clone())).unwrap().is_zero());
    }

    #[test]
    fn appearance_and_removal() {
        let a = ArtifactState::at(5.0, 5.0);
        let d = detect_delta(None, Some(&a)).unwrap();
        assert!(d.appearance && !d.removal);
        assert_eq!(d.delta_pos, 0.0);
        assert_eq!(d.delta_char, 0);

        let mut gone = a.clone();
        gone.deleted = true;
        let d = detect_delta(Some(&a), Some(&gone)).unwrap();
        assert!(d.removal && !d.appearance);
        let d = detect_delta(Some(&a), None).unwrap();
        assert!(d.removal);
        // deleted -> deleted: nothing observable
        assert!(detect_delta(Some(&gone), Some(&gone)).unwrap().is_zero());
        // re-creation after delete
        assert!(detect_delta(Some(&gone), Some(&a)).unwrap().appearance);
    }

    #[test]
    fn both_absent_rejected() {
        assert!(matches!(detect_delta(None, None), Err(Error::NoStates)));
    }

    #[test]
    fn text_social_and_links() {
        let mut a = ArtifactState::at(0.0, 0.0);
        a.text = Some("abc".into());
        a.reaction_count = Some(2);
        a.comment_count = Some(1);
        a.start_id = Some("n1".into());
        a.end_id = Some("n2".into());
        let mut b = a.clone();
        b.text = Some("a".into());
        b.reaction_count = Some(1);
        b.comment_count = Some(3);
        b.end_id = Some("n3".into());
        let d = detect_delta(Some(&a), Some(&b)).unwrap();
        assert_eq!(d.delta_char, -2);
        assert_eq!(d.delta_reactions, 0, "decreases are not increases");
        assert_eq!(d.delta_comments, 2);
        assert!(d.relation_change);
        assert!(!d.container_change);
    }

    #[test]
    fn character_count_not_bytes() {
        let mut a = ArtifactState::at(0.0, 0.0);
        a.text = Some("차".into());
        let mut b = a.clone();
        b.text = Some("차茶".into());
        assert_eq!(detect_delta(Some(&a), Some(&b)).unwrap().delta_char, 1);
    }
}
