use std::fmt;

use super::containment::{is_at_level, Containment, Level, CONTAINS};
use super::EngineeringError;
use crate::instance::{Link, LinkKey, ObjectInstance, System};
use crate::metamodel::Model;
use crate::value::{StateMap, Value};

/// Role of reference links: the source holds a reference to the target.
pub const REF: &str = "ref";
/// Role of explicit authorization grants.
pub const GRANT: &str = "grant";
/// Boolean attribute standing for blanket authorization.
pub const AUTHORIZED: &str = "authorized";
/// Attribute of a node naming the credential it accepts; `*` accepts any.
pub const ACCEPTS: &str = "accepts";
/// Payload attributes every software entity carries besides its state.
pub const PAYLOAD: [&str; 3] = ["authority", "credential", "code"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DenyReason {
    NoReference,
    NoAuthorization,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Authorization {
    Allow,
    Deny(DenyReason),
}

impl fmt::Display for Authorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Authorization::Allow => f.write_str("ALLOW"),
            Authorization::Deny(DenyReason::NoReference) => f.write_str("DENY(NO_REFERENCE)"),
            Authorization::Deny(DenyReason::NoAuthorization) => f.write_str("DENY(NO_AUTHORIZATION)"),
        }
    }
}

fn has_link(system: &System, role: &str, source: &str, target: &str) -> bool {
    system
        .find_link(&LinkKey {
            role: role.into(),
            source: source.into(),
            target: target.into(),
        })
        .is_some()
}

/// `authorized = true` on `client`, or a grant link from `client` to
/// `target`.
pub fn is_authorized(client: &str, target: &str, system: &System) -> bool {
    let flag = system
        .objects
        .get(client)
        .and_then(|o| o.state.get(AUTHORIZED))
        .and_then(Value::as_bool)
        .unwrap_or(false);
    flag || has_link(system, GRANT, client, target)
}

/// Whether `client` may invoke `target`: it needs a reference to the target
/// and an authorization. The reference is checked first.
pub fn authorize_invocation(client: &str, target: &str, system: &System) -> Authorization {
    if !has_link(system, REF, client, target) {
        Authorization::Deny(DenyReason::NoReference)
    } else if !is_authorized(client, target, system) {
        Authorization::Deny(DenyReason::NoAuthorization)
    } else {
        Authorization::Allow
    }
}

/// What travels when a software entity moves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoftwareEntity {
    pub object_ref: String,
    pub state: StateMap,
    pub authority: String,
    pub credential: String,
    pub code: String,
}

impl SoftwareEntity {
    /// Reads the payload of `id`; every payload attribute must be a
    /// non-empty string.
    pub fn from_object(system: &System, id: &str) -> Result<SoftwareEntity, EngineeringError> {
        let object = system
            .objects
            .get(id)
            .ok_or_else(|| EngineeringError::UnknownObject(id.to_string()))?;
        let field = |name: &str| -> Result<String, EngineeringError> {
            match object.state.get(name).and_then(Value::as_str) {
                Some(v) if !v.is_empty() => Ok(v.to_string()),
                _ => Err(EngineeringError::IncompletePayload {
                    object: id.to_string(),
                    attribute: name.to_string(),
                }),
            }
        };
        Ok(SoftwareEntity {
            object_ref: id.to_string(),
            state: object.state.clone(),
            authority: field(PAYLOAD[0])?,
            credential: field(PAYLOAD[1])?,
            code: field(PAYLOAD[2])?,
        })
    }
}

/// Record of a transfer: where the entity left from and where it went.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TravelRequest {
    pub entity: String,
    pub source: Option<String>,
    pub destination: String,
}

fn first_cluster(containment: &Containment, node: &str) -> Result<String, EngineeringError> {
    containment
        .clusters_under(node)
        .first()
        .map(|c| c.to_string())
        .ok_or_else(|| EngineeringError::NoCluster(node.to_string()))
}

fn check_node(system: &System, model: &Model, node: &str) -> Result<(), EngineeringError> {
    if is_at_level(system, model, node, Level::Node) {
        Ok(())
    } else {
        Err(EngineeringError::UnknownDestination(node.to_string()))
    }
}

fn place(system: &mut System, cluster: &str, object: &str) {
    system.links.retain(|_, l| !(l.role == CONTAINS && l.target == object));
    let key = LinkKey {
        role: CONTAINS.into(),
        source: cluster.into(),
        target: object.into(),
    };
    let id = system.fresh_link_id(&key);
    system
        .links
        .insert(id.clone(), Link::new(id, key.role, key.source, key.target));
}

/// Moves `entity` into the first cluster under `dest`. The node must accept
/// the entity's credential; the entity's attributes are left untouched.
pub fn transfer_entity(
    entity: &SoftwareEntity,
    dest: &str,
    system: &System,
    model: &Model,
) -> Result<(System, TravelRequest), EngineeringError> {
    if !system.objects.contains_key(&entity.object_ref) {
        return Err(EngineeringError::UnknownObject(entity.object_ref.clone()));
    }
    check_node(system, model, dest)?;
    let accepts = system.objects[dest].state.get(ACCEPTS).and_then(Value::as_str);
    if !matches!(accepts, Some(a) if a == "*" || a == entity.credential) {
        return Err(EngineeringError::CredentialRejected {
            entity: entity.object_ref.clone(),
            node: dest.to_string(),
        });
    }
    let containment = Containment::of(system, model);
    let cluster = first_cluster(&containment, dest)?;
    let source = containment.location(&entity.object_ref).map(|(n, _, _)| n.to_string());
    let mut s = system.clone();
    place(&mut s, &cluster, &entity.object_ref);
    Ok((
        s,
        TravelRequest {
            entity: entity.object_ref.clone(),
            source,
            destination: dest.to_string(),
        },
    ))
}

/// Creates an instance of `template` in the first cluster under `dest` on
/// behalf of `client`, which must be authorized for `dest`. Attributes
/// missing from `init` take their sort's default. Returns the new id.
pub fn remote_create(
    client: &str,
    template: &str,
    init: &StateMap,
    dest: &str,
    system: &System,
    model: &Model,
) -> Result<(System, String), EngineeringError> {
    if !system.objects.contains_key(client) {
        return Err(EngineeringError::UnknownObject(client.to_string()));
    }
    if !is_authorized(client, dest, system) {
        return Err(EngineeringError::AuthenticationFailed {
            client: client.to_string(),
            node: dest.to_string(),
        });
    }
    let of = model
        .closure(template)
        .map_err(|_| EngineeringError::MissingTemplate(template.to_string()))?;
    check_node(system, model, dest)?;
    let containable = model
        .roles
        .get(CONTAINS)
        .is_some_and(|r| r.target_templates.iter().any(|t| of.contains(t)));
    if !containable {
        return Err(EngineeringError::NotContainable(template.to_string()));
    }
    let attrs = model.attributes_of_set(&of);
    let mut object = ObjectInstance::new("", of.iter());
    for (attr, sort) in &attrs {
        let value = match init.get(attr) {
            Some(v) if v.sort() == *sort => v.clone(),
            Some(_) => {
                return Err(EngineeringError::BadInitialValue {
                    template: template.to_string(),
                    attribute: attr.clone(),
                })
            }
            None => sort.default_value(),
        };
        object.state.insert(attr.clone(), value);
    }
    if let Some(attr) = init.keys().find(|a| !attrs.contains_key(*a)) {
        return Err(EngineeringError::BadInitialValue {
            template: template.to_string(),
            attribute: attr.clone(),
        });
    }
    let cluster = first_cluster(&Containment::of(system, model), dest)?;
    let mut s = system.clone();
    let id = s.fresh_object_id(&template.to_lowercase());
    object.id = id.clone();
    s.objects.insert(id.clone(), object);
    place(&mut s, &cluster, &id);
    Ok((s, id))
}
