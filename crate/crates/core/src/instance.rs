//! The instance language: systems of objects, links and time points.

use std::collections::{BTreeMap, BTreeSet};

use crate::span::Loc;
use crate::value::{StateMap, Value};

/// A system: a self-contained instance claiming exactly one model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct System {
    pub name: String,
    /// Name of the model this system claims to instantiate.
    pub model_ref: String,
    pub objects: BTreeMap<String, ObjectInstance>,
    pub links: BTreeMap<String, Link>,
    /// Ordered instants; a label's index is its position.
    pub time_points: Vec<TimePoint>,
    pub loc: Loc,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ObjectInstance {
    pub id: String,
    /// Templates the object instantiates.
    pub of: BTreeSet<String>,
    pub state: StateMap,
    pub loc: Loc,
}

impl ObjectInstance {
    pub fn new<S: Into<String>>(id: impl Into<String>, of: impl IntoIterator<Item = S>) -> Self {
        ObjectInstance {
            id: id.into(),
            of: of.into_iter().map(Into::into).collect(),
            state: StateMap::new(),
            loc: Loc::NONE,
        }
    }

    pub fn with(mut self, attr: impl Into<String>, value: Value) -> Self {
        self.state.insert(attr.into(), value);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Link {
    pub id: String,
    /// The role this link instantiates.
    pub role: String,
    pub source: String,
    pub target: String,
    pub loc: Loc,
}

impl Link {
    pub fn new(
        id: impl Into<String>,
        role: impl Into<String>,
        source: impl Into<String>,
        target: impl Into<String>,
    ) -> Self {
        Link {
            id: id.into(),
            role: role.into(),
            source: source.into(),
            target: target.into(),
            loc: Loc::NONE,
        }
    }

    pub fn key(&self) -> LinkKey {
        LinkKey {
            role: self.role.clone(),
            source: self.source.clone(),
            target: self.target.clone(),
        }
    }
}

/// `(role, source, target)`: unique per system.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkKey {
    pub role: String,
    pub source: String,
    pub target: String,
}

impl std::fmt::Display for LinkKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}({} -> {})", self.role, self.source, self.target)
    }
}

/// A named instant. `states: None` means the objects' own states hold at
/// this instant; `Some` records an explicit snapshot, which must mention
/// every object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimePoint {
    pub label: String,
    pub states: Option<BTreeMap<String, StateMap>>,
    pub loc: Loc,
}

impl TimePoint {
    pub fn current(label: impl Into<String>) -> Self {
        TimePoint {
            label: label.into(),
            states: None,
            loc: Loc::NONE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    Pre,
    Post,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundState {
    Start,
    End,
}

/// Records which snapshot a rule's pre- or postcondition was evaluated in
/// for one object. Well-formed bindings pair `Pre` with `Start` and `Post`
/// with `End`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConditionBinding {
    pub condition: Condition,
    pub rule: String,
    pub object: String,
    pub bound: BoundState,
}

impl System {
    pub fn new(name: impl Into<String>, model_ref: impl Into<String>) -> Self {
        System {
            name: name.into(),
            model_ref: model_ref.into(),
            ..Default::default()
        }
    }

    pub fn add_object(&mut self, object: ObjectInstance) {
        self.objects.insert(object.id.clone(), object);
    }

    pub fn add_link(&mut self, link: Link) {
        self.links.insert(link.id.clone(), link);
    }

    pub fn with_object(mut self, object: ObjectInstance) -> Self {
        self.add_object(object);
        self
    }

    pub fn with_link(mut self, link: Link) -> Self {
        self.add_link(link);
        self
    }

    pub fn links_of_role<'a>(&'a self, role: &'a str) -> impl Iterator<Item = &'a Link> + 'a {
        self.links.values().filter(move |l| l.role == role)
    }

    pub fn find_link(&self, key: &LinkKey) -> Option<&Link> {
        self.links
            .values()
            .find(|l| l.role == key.role && l.source == key.source && l.target == key.target)
    }

    /// Targets of `role`-links leaving `source`.
    pub fn targets(&self, role: &str, source: &str) -> BTreeSet<String> {
        self.links
            .values()
            .filter(|l| l.role == role && l.source == source)
            .map(|l| l.target.clone())
            .collect()
    }

    /// Sources of `role`-links entering `target`.
    pub fn sources(&self, role: &str, target: &str) -> BTreeSet<String> {
        self.links
            .values()
            .filter(|l| l.role == role && l.target == target)
            .map(|l| l.source.clone())
            .collect()
    }

    pub fn time_index(&self, label: &str) -> Option<usize> {
        self.time_points.iter().position(|t| t.label == label)
    }

    /// The system as it stands at instant `label`: explicit snapshot states
    /// replace object states. Objects missing from an explicit snapshot keep
    /// an empty state.
    pub fn view_at(&self, label: &str) -> Option<System> {
        let tp = self.time_points.iter().find(|t| t.label == label)?;
        let mut view = self.clone();
        if let Some(states) = &tp.states {
            for (id, object) in view.objects.iter_mut() {
                object.state = states.get(id).cloned().unwrap_or_default();
            }
        }
        Some(view)
    }

    /// A fresh object id of the form `{prefix}_{n}`, smallest `n >= 1`.
    pub fn fresh_object_id(&self, prefix: &str) -> String {
        (1..)
            .map(|n| format!("{prefix}_{n}"))
            .find(|id| !self.objects.contains_key(id))
            .expect("unbounded search")
    }

    /// A fresh link id derived from the link's key.
    pub fn fresh_link_id(&self, key: &LinkKey) -> String {
        let base = format!("{}__{}__{}", key.role, key.source, key.target);
        if !self.links.contains_key(&base) {
            return base;
        }
        (2..)
            .map(|n| format!("{base}_{n}"))
            .find(|id| !self.links.contains_key(id))
            .expect("unbounded search")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn view_at_replaces_states_from_explicit_snapshot() {
        let mut s = System::new("S", "M").with_object(ObjectInstance::new("o1", ["T"]).with("load", Value::int(5)));
        let mut states = BTreeMap::new();
        states.insert("o1".to_string(), StateMap::from([("load".into(), Value::int(1))]));
        s.time_points.push(TimePoint::current("now"));
        s.time_points.push(TimePoint {
            label: "before".into(),
            states: Some(states),
            loc: Loc::NONE,
        });
        assert_eq!(s.view_at("now").unwrap(), s);
        assert_eq!(s.view_at("before").unwrap().objects["o1"].state["load"], Value::int(1));
        assert!(s.view_at("never").is_none());
        assert_eq!(s.time_index("before"), Some(1));
    }

    #[test]
    fn fresh_ids_avoid_existing() {
        let s = System::new("S", "M")
            .with_object(ObjectInstance::new("n_1", ["T"]))
            .with_link(Link::new("r__a__b", "r", "a", "b"));
        assert_eq!(s.fresh_object_id("n"), "n_2");
        let key = LinkKey {
            role: "r".into(),
            source: "a".into(),
            target: "b".into(),
        };
        assert_eq!(s.fresh_link_id(&key), "r__a__b_2");
    }
}
