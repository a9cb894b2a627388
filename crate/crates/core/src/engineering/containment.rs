use std::collections::{BTreeMap, BTreeSet};

use super::tags::{EngineeringTag, Management};
use crate::instance::System;
use crate::metamodel::Model;

/// Role linking a node to the capsules it hosts.
pub const HOSTS: &str = "hosts";
/// Role linking a capsule to its clusters.
pub const GROUPS: &str = "groups";
/// Role linking a cluster to its engineering objects.
pub const CONTAINS: &str = "contains";

/// Containment levels, outermost first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Node,
    Capsule,
    Cluster,
    Object,
}

impl Level {
    fn tag(self) -> EngineeringTag {
        EngineeringTag::Management(match self {
            Level::Node => Management::Node,
            Level::Capsule => Management::Capsule,
            Level::Cluster => Management::Cluster,
            Level::Object => Management::Object,
        })
    }

    /// The role linking this level to the next one down, and that level.
    pub fn child_role(self) -> Option<(&'static str, Level)> {
        match self {
            Level::Node => Some((HOSTS, Level::Capsule)),
            Level::Capsule => Some((GROUPS, Level::Cluster)),
            Level::Cluster => Some((CONTAINS, Level::Object)),
            Level::Object => None,
        }
    }

    pub fn of_role(role: &str) -> Option<(Level, Level)> {
        match role {
            HOSTS => Some((Level::Node, Level::Capsule)),
            GROUPS => Some((Level::Capsule, Level::Cluster)),
            CONTAINS => Some((Level::Cluster, Level::Object)),
            _ => None,
        }
    }
}

/// Whether `object` carries the management tag of `level`.
pub fn is_at_level(system: &System, model: &Model, object: &str, level: Level) -> bool {
    system
        .objects
        .get(object)
        .is_some_and(|o| model.tags_of(&o.of).contains(&level.tag()))
}

/// Node → capsule → cluster → object tree read off the containment links.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Containment {
    pub nodes: BTreeMap<String, BTreeMap<String, BTreeMap<String, BTreeSet<String>>>>,
}

impl Containment {
    /// Builds the tree from `system`. Links between objects at the wrong
    /// levels are ignored here and reported by `check_engineering`.
    pub fn of(system: &System, model: &Model) -> Containment {
        let children = |parent: &str, level: Level| -> BTreeSet<String> {
            let (role, child_level) = level.child_role().expect("not a leaf level");
            system
                .targets(role, parent)
                .into_iter()
                .filter(|c| is_at_level(system, model, c, child_level))
                .collect()
        };
        let mut nodes = BTreeMap::new();
        for node in system
            .objects
            .keys()
            .filter(|o| is_at_level(system, model, o, Level::Node))
        {
            let mut capsules = BTreeMap::new();
            for capsule in children(node, Level::Node) {
                let mut clusters = BTreeMap::new();
                for cluster in children(&capsule, Level::Capsule) {
                    let objects = children(&cluster, Level::Cluster);
                    clusters.insert(cluster, objects);
                }
                capsules.insert(capsule, clusters);
            }
            nodes.insert(node.clone(), capsules);
        }
        Containment { nodes }
    }

    /// Node, capsule and cluster holding `object`.
    pub fn location(&self, object: &str) -> Option<(&str, &str, &str)> {
        for (node, capsules) in &self.nodes {
            for (capsule, clusters) in capsules {
                for (cluster, objects) in clusters {
                    if objects.contains(object) {
                        return Some((node, capsule, cluster));
                    }
                }
            }
        }
        None
    }

    /// Clusters under `node`, in id order.
    pub fn clusters_under(&self, node: &str) -> Vec<&str> {
        self.nodes
            .get(node)
            .into_iter()
            .flat_map(|caps| caps.values())
            .flat_map(|clusters| clusters.keys())
            .map(String::as_str)
            .collect()
    }

    /// Every placed object, with multiplicity; a forest lists each at most
    /// once.
    pub fn placements(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for capsules in self.nodes.values() {
            for clusters in capsules.values() {
                for objects in clusters.values() {
                    out.extend(objects.iter().map(String::as_str));
                }
            }
        }
        out
    }

    /// Each capsule, cluster and object appears under one parent only.
    pub fn is_forest(&self) -> bool {
        let mut capsules = BTreeSet::new();
        let mut clusters = BTreeSet::new();
        let mut objects = BTreeSet::new();
        for caps in self.nodes.values() {
            for (capsule, cls) in caps {
                if !capsules.insert(capsule) {
                    return false;
                }
                for (cluster, objs) in cls {
                    if !clusters.insert(cluster) {
                        return false;
                    }
                    for o in objs {
                        if !objects.insert(o) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}
