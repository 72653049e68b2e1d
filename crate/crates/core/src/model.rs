//! Shared domain vocabulary: artifacts, action categories, subtypes, conditions and phases.
//!
//! Subtype names follow the `Category_group[_detail]` convention, e.g.
//! `Create_inspiration_agent`, `Relocate_structure_large` or `Intent_edit_global`.
//! The full vocabulary is the valid cross product below:
//!
//! | category  | groups                          | magnitude | detail                      |
//! |-----------|---------------------------------|-----------|-----------------------------|
//! | Create    | inspiration, structure, control | n/a       | `agent` (inspiration only), `column`/`table` (structure) |
//! | Elaborate | inspiration, structure, control | 4 levels  |                             |
//! | Relocate  | inspiration, structure, control | 4 levels  |                             |
//! | Relate    | relation                        | n/a       |                             |
//! | Structure | structure                       | n/a       |                             |
//! | Prune     | all four                        | n/a       |                             |
//! | Interact  | none                            | n/a       | `comment_create`, `reaction` |
//! | AgentGen, PromptGen, ImageEdit | none       | n/a       |                             |
//! | IntentEdit | none                           | n/a       | `global`, `local`           |
//!
//! Connectors never produce Create/Elaborate/Relocate: everything that happens to a
//! live connector is connector management and maps to `Relate`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Note,
    Image,
    Drawing,
    Table,
    Column,
    TodoList,
    Connector,
    AgentImage,
}

impl ArtifactKind {
    pub const ALL: [ArtifactKind; 8] = [
        ArtifactKind::Note,
        ArtifactKind::Image,
        ArtifactKind::Drawing,
        ArtifactKind::Table,
        ArtifactKind::Column,
        ArtifactKind::TodoList,
        ArtifactKind::Connector,
        ArtifactKind::AgentImage,
    ];

    pub fn group(self) -> ArtifactGroup {
        group_of(self)
    }

    /// Whether snapshots of this kind carry editable text.
    pub fn has_text(self) -> bool {
        matches!(
            self,
            ArtifactKind::Note
                | ArtifactKind::Table
                | ArtifactKind::Column
                | ArtifactKind::TodoList
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ArtifactGroup {
    Inspiration,
    Container,
    Control,
    Relation,
}

impl ArtifactGroup {
    pub const ALL: [ArtifactGroup; 4] = [
        ArtifactGroup::Inspiration,
        ArtifactGroup::Container,
        ArtifactGroup::Control,
        ArtifactGroup::Relation,
    ];

    /// Token used inside subtype names. Containers are named `structure`.
    pub fn token(self) -> &'static str {
        match self {
            ArtifactGroup::Inspiration => "inspiration",
            ArtifactGroup::Container => "structure",
            ArtifactGroup::Control => "control",
            ArtifactGroup::Relation => "relation",
        }
    }
}

pub fn group_of(kind: ArtifactKind) -> ArtifactGroup {
    match kind {
        ArtifactKind::Note
        | ArtifactKind::Image
        | ArtifactKind::Drawing
        | ArtifactKind::AgentImage => ArtifactGroup::Inspiration,
        ArtifactKind::Column | ArtifactKind::Table => ArtifactGroup::Container,
        ArtifactKind::TodoList => ArtifactGroup::Control,
        ArtifactKind::Connector => ArtifactGroup::Relation,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionCategory {
    Create,
    Elaborate,
    Relocate,
    Relate,
    Structure,
    Prune,
    Interact,
    AgentGen,
    PromptGen,
    ImageEdit,
    IntentEdit,
}

impl ActionCategory {
    pub const COUNT: usize = 11;

    pub const ALL: [ActionCategory; 11] = [
        ActionCategory::Create,
        ActionCategory::Elaborate,
        ActionCategory::Relocate,
        ActionCategory::Relate,
        ActionCategory::Structure,
        ActionCategory::Prune,
        ActionCategory::Interact,
        ActionCategory::AgentGen,
        ActionCategory::PromptGen,
        ActionCategory::ImageEdit,
        ActionCategory::IntentEdit,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<ActionCategory> {
        Self::ALL.get(i).copied()
    }

    /// Derived from explicit system task codes rather than artifact state.
    pub fn is_system(self) -> bool {
        matches!(
            self,
            ActionCategory::AgentGen
                | ActionCategory::PromptGen
                | ActionCategory::ImageEdit
                | ActionCategory::IntentEdit
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ActionCategory::Create => "Create",
            ActionCategory::Elaborate => "Elaborate",
            ActionCategory::Relocate => "Relocate",
            ActionCategory::Relate => "Relate",
            ActionCategory::Structure => "Structure",
            ActionCategory::Prune => "Prune",
            ActionCategory::Interact => "Interact",
            ActionCategory::AgentGen => "AgentGen",
            ActionCategory::PromptGen => "PromptGen",
            ActionCategory::ImageEdit => "ImageEdit",
            ActionCategory::IntentEdit => "IntentEdit",
        }
    }
}

impl fmt::Display for ActionCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActionCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ActionCategory::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown action category `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Magnitude {
    Micro,
    Small,
    Medium,
    Large,
    NotApplicable,
}

impl Magnitude {
    pub const LEVELS: [Magnitude; 4] = [
        Magnitude::Micro,
        Magnitude::Small,
        Magnitude::Medium,
        Magnitude::Large,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Magnitude::Micro => "micro",
            Magnitude::Small => "small",
            Magnitude::Medium => "medium",
            Magnitude::Large => "large",
            Magnitude::NotApplicable => "not_applicable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Baseline,
    AgentOrganizer,
}

impl Condition {
    pub const ALL: [Condition; 2] = [Condition::Baseline, Condition::AgentOrganizer];

    pub fn token(self) -> &'static str {
        match self {
            Condition::Baseline => "baseline",
            Condition::AgentOrganizer => "agent_organizer",
        }
    }

    pub fn other(self) -> Condition {
        match self {
            Condition::Baseline => Condition::AgentOrganizer,
            Condition::AgentOrganizer => Condition::Baseline,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Condition::ALL
            .iter()
            .copied()
            .find(|c| c.token() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown condition `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Early,
    Mid,
    Late,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Early, Phase::Mid, Phase::Late];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn token(self) -> &'static str {
        match self {
            Phase::Early => "early",
            Phase::Mid => "mid",
            Phase::Late => "late",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Phase::ALL
            .iter()
            .copied()
            .find(|p| p.token() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown phase `{s}`")))
    }
}

/// Extra discriminator for subtypes whose name is not fixed by category and group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Qualifier {
    Column,
    Table,
    Comment,
    Reaction,
    Global,
    Local,
}

/// A fine-grained action type from the closed subtype vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Subtype {
    category: ActionCategory,
    group: Option<ArtifactGroup>,
    magnitude: Magnitude,
    agent_origin: bool,
    qualifier: Option<Qualifier>,
}

impl Subtype {
    pub fn new(
        category: ActionCategory,
        group: Option<ArtifactGroup>,
        magnitude: Magnitude,
        agent_origin: bool,
        qualifier: Option<Qualifier>,
    ) -> Result<Subtype> {
        let s = Subtype {
            category,
            group,
            magnitude,
            agent_origin,
            qualifier,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        use ActionCategory::*;
        let bad = |why: &str| Err(Error::InvalidSubtype(format!("{why} ({self:?})")));
        let quantized = matches!(self.category, Elaborate | Relocate);
        if quantized == (self.magnitude == Magnitude::NotApplicable) {
            return bad("magnitude is required for Elaborate/Relocate and forbidden otherwise");
        }
        if self.agent_origin
            && !(self.category == Create && self.group == Some(ArtifactGroup::Inspiration))
        {
            return bad("agent origin only applies to created inspiration artifacts");
        }
        let spatial = [
            ArtifactGroup::Inspiration,
            ArtifactGroup::Container,
            ArtifactGroup::Control,
        ];
        let group_ok = match self.category {
            Create | Elaborate | Relocate => self.group.is_some_and(|g| spatial.contains(&g)),
            Relate => self.group == Some(ArtifactGroup::Relation),
            Structure => self.group == Some(ArtifactGroup::Container),
            Prune => self.group.is_some(),
            Interact | AgentGen | PromptGen | ImageEdit | IntentEdit => self.group.is_none(),
        };
        if !group_ok {
            return bad("artifact group not valid for this category");
        }
        let qualifier_ok = match (self.category, self.qualifier) {
            (Create, q) if self.group == Some(ArtifactGroup::Container) => {
                matches!(q, Some(Qualifier::Column | Qualifier::Table))
            }
            (Interact, q) => matches!(q, Some(Qualifier::Comment | Qualifier::Reaction)),
            (IntentEdit, q) => matches!(q, Some(Qualifier::Global | Qualifier::Local)),
            (_, q) => q.is_none(),
        };
        if !qualifier_ok {
            return bad("qualifier not valid for this category");
        }
        Ok(())
    }

    pub fn create(kind: ArtifactKind) -> Result<Subtype> {
        let qualifier = match kind {
            ArtifactKind::Column => Some(Qualifier::Column),
            ArtifactKind::Table => Some(Qualifier::Table),
            _ => None,
        };
        Subtype::new(
            ActionCategory::Create,
            Some(kind.group()),
            Magnitude::NotApplicable,
            kind == ArtifactKind::AgentImage,
            qualifier,
        )
    }

    pub fn quantized(
        category: ActionCategory,
        group: ArtifactGroup,
        magnitude: Magnitude,
    ) -> Result<Subtype> {
        Subtype::new(category, Some(group), magnitude, false, None)
    }

    pub fn prune(group: ArtifactGroup) -> Subtype {
        Subtype {
            category: ActionCategory::Prune,
            group: Some(group),
            ..Subtype::bare(ActionCategory::Prune)
        }
    }

    pub fn relate() -> Subtype {
        Subtype {
            group: Some(ArtifactGroup::Relation),
            ..Subtype::bare(ActionCategory::Relate)
        }
    }

    pub fn structure() -> Subtype {
        Subtype {
            group: Some(ArtifactGroup::Container),
            ..Subtype::bare(ActionCategory::Structure)
        }
    }

    pub fn interact(comment: bool) -> Subtype {
        let q = if comment {
            Qualifier::Comment
        } else {
            Qualifier::Reaction
        };
        Subtype {
            qualifier: Some(q),
            ..Subtype::bare(ActionCategory::Interact)
        }
    }

    pub fn intent_edit(global: bool) -> Subtype {
        let q = if global {
            Qualifier::Global
        } else {
            Qualifier::Local
        };
        Subtype {
            qualifier: Some(q),
            ..Subtype::bare(ActionCategory::IntentEdit)
        }
    }

    /// AgentGen, PromptGen or ImageEdit.
    pub fn system(category: ActionCategory) -> Result<Subtype> {
        Subtype::new(category, None, Magnitude::NotApplicable, false, None)
    }

    fn bare(category: ActionCategory) -> Subtype {
        Subtype {
            category,
            group: None,
            magnitude: Magnitude::NotApplicable,
            agent_origin: false,
            qualifier: None,
        }
    }

    pub fn category(&self) -> ActionCategory {
        self.category
    }

    pub fn group(&self) -> Option<ArtifactGroup> {
        self.group
    }

    pub fn magnitude(&self) -> Magnitude {
        self.magnitude
    }

    pub fn agent_origin(&self) -> bool {
        self.agent_origin
    }

    pub fn qualifier(&self) -> Option<Qualifier> {
        self.qualifier
    }

    pub fn with_magnitude(self, magnitude: Magnitude) -> Result<Subtype> {
        Subtype::new(
            self.category,
            self.group,
            magnitude,
            self.agent_origin,
            self.qualifier,
        )
    }

    pub fn name(&self) -> String {
        use ActionCategory::*;
        let group = self.group.map(ArtifactGroup::token).unwrap_or_default();
        match self.category {
            Create => {
                let mut s = format!("Create_{group}");
                if self.agent_origin {
                    s.push_str("_agent");
                }
                match self.qualifier {
                    Some(Qualifier::Column) => s.push_str("_column"),
                    Some(Qualifier::Table) => s.push_str("_table"),
                    _ => {}
                }
                s
            }
            Elaborate | Relocate => format!(
                "{}_{group}_{}",
                self.category.name(),
                self.magnitude.token()
            ),
            Relate => "Relate".to_string(),
            Structure => "Structure".to_string(),
            Prune => format!("Prune_{group}"),
            Interact => match self.qualifier {
                Some(Qualifier::Comment) => "Interact_comment_create".to_string(),
                _ => "Interact_reaction".to_string(),
            },
            AgentGen => "Agent_gen".to_string(),
            PromptGen => "Prompt_gen".to_string(),
            ImageEdit => "Image_edit".to_string(),
            IntentEdit => match self.qualifier {
                Some(Qualifier::Global) => "Intent_edit_global".to_string(),
                _ => "Intent_edit_local".to_string(),
            },
        }
    }

    /// Every valid subtype, in a fixed order.
    pub fn vocabulary() -> &'static [Subtype] {
        &VOCABULARY
    }
}

static VOCABULARY: LazyLock<Vec<Subtype>> = LazyLock::new(|| {
    let mut out = Vec::new();
    let groups: Vec<Option<ArtifactGroup>> = std::iter::once(None)
        .chain(ArtifactGroup::ALL.into_iter().map(Some))
        .collect();
    let magnitudes = [
        Magnitude::Micro,
        Magnitude::Small,
        Magnitude::Medium,
        Magnitude::Large,
        Magnitude::NotApplicable,
    ];
    let qualifiers = [
        None,
        Some(Qualifier::Column),
        Some(Qualifier::Table),
        Some(Qualifier::Comment),
        Some(Qualifier::Reaction),
        Some(Qualifier::Global),
        Some(Qualifier::Local),
    ];
    for category in ActionCategory::ALL {
        for &group in &groups {
            for magnitude in magnitudes {
                for agent in [false, true] {
                    for qualifier in qualifiers {
                        if let Ok(s) = Subtype::new(category, group, magnitude, agent, qualifier) {
                            out.push(s);
                        }
                    }
                }
            }
        }
    }
    out
});

static BY_NAME: LazyLock<HashMap<String, Subtype>> =
    LazyLock::new(|| VOCABULARY.iter().map(|s| (s.name(), *s)).collect());

/// Canonical subtype string for a (category, group, magnitude, origin) combination.
///
/// Subtypes that need a further discriminator (container column/table, comment vs
/// reaction, global vs local intent) take it through [`Subtype::new`].
pub fn subtype_name(
    category: ActionCategory,
    group: Option<ArtifactGroup>,
    magnitude: Magnitude,
    agent_origin: bool,
) -> Result<String> {
    Subtype::new(category, group, magnitude, agent_origin, None).map(|s| s.name())
}

impl fmt::Display for Subtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Subtype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BY_NAME
            .get(s)
            .copied()
            .ok_or_else(|| Error::UnknownSubtype(s.to_string()))
    }
}

impl TryFrom<String> for Subtype {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Subtype> for String {
    fn from(s: Subtype) -> String {
        s.name()
    }
}

/// A classified semantic action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignAction {
    pub designer_id: String,
    pub condition: Condition,
    pub task: String,
    pub timestamp: i64,
    pub category: ActionCategory,
    pub subtype: Subtype,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifact_id: Option<String>,
    pub magnitude: Magnitude,
    /// Unquantized displacement (px) or |character change| behind `magnitude`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_magnitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concurrent_group: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<Phase>,
}

impl DesignAction {
    pub fn new(
        designer_id: impl Into<String>,
        condition: Condition,
        task: impl Into<String>,
        timestamp: i64,
        subtype: Subtype,
    ) -> DesignAction {
        DesignAction {
            designer_id: designer_id.into(),
            condition,
            task: task.into(),
            timestamp,
            category: subtype.category(),
            subtype,
            artifact_id: None,
            magnitude: subtype.magnitude(),
            raw_magnitude: None,
            concurrent_group: None,
            phase: None,
        }
    }

    pub fn with_artifact(mut self, id: impl Into<String>) -> Self {
        self.artifact_id = Some(id.into());
        self
    }

    /// Replace the subtype (and the derived category/magnitude fields).
    pub fn set_subtype(&mut self, subtype: Subtype) {
        self.category = subtype.category();
        self.magnitude = subtype.magnitude();
        self.subtype = subtype;
    }
}
