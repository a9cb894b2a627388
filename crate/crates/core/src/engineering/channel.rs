use super::EngineeringError;
use crate::instance::{Link, LinkKey, ObjectInstance, System};
use crate::metamodel::Model;
use crate::value::Value;

pub const STUB: &str = "Stub";
pub const BINDER: &str = "Binder";
pub const PROTOCOL: &str = "Protocol";

/// Chain roles in order from the client to the server.
pub const CHAIN_ROLES: [&str; 7] = [
    "uses",
    "stubBinder",
    "binderProtocol",
    "interworks",
    "protocolBinder",
    "binderStub",
    "delivers",
];

/// Suffixes of the six channel objects, client side first.
const PARTS: [(&str, &str, &str); 6] = [
    ("cstub", STUB, "client"),
    ("cbinder", BINDER, "client"),
    ("cproto", PROTOCOL, "client"),
    ("sproto", PROTOCOL, "server"),
    ("sbinder", BINDER, "server"),
    ("sstub", STUB, "server"),
];

/// Ids of the six channel objects between `client` and `server`, client
/// side first.
pub fn channel_ids(client: &str, server: &str) -> [String; 6] {
    PARTS.map(|(suffix, _, _)| format!("ch_{client}_{server}_{suffix}"))
}

/// Adds a stub/binder/protocol channel between `client` and `server`:
/// six objects and seven links forming the chain
/// client → stub → binder → protocol → protocol → binder → stub → server.
pub fn build_channel(client: &str, server: &str, system: &System, model: &Model) -> Result<System, EngineeringError> {
    let missing: Vec<String> = [STUB, BINDER, PROTOCOL]
        .iter()
        .filter(|t| !model.templates.contains_key(**t))
        .chain(CHAIN_ROLES.iter().filter(|r| !model.roles.contains_key(**r)))
        .map(|s| s.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(EngineeringError::MissingChannelTemplates(missing));
    }
    for id in [client, server] {
        if !system.objects.contains_key(id) {
            return Err(EngineeringError::UnknownObject(id.to_string()));
        }
    }
    let ids = channel_ids(client, server);
    if ids.iter().any(|id| system.objects.contains_key(id)) {
        return Err(EngineeringError::DuplicateChannel {
            client: client.to_string(),
            server: server.to_string(),
        });
    }

    let mut s = system.clone();
    for (id, (_, template, side)) in ids.iter().zip(PARTS) {
        let of = model
            .closure(template)
            .map_err(|_| EngineeringError::MissingChannelTemplates(vec![template.to_string()]))?;
        let mut object = ObjectInstance::new(id.clone(), of.iter());
        for (attr, sort) in model.attributes_of_set(&of) {
            object.state.insert(attr, sort.default_value());
        }
        object.state.insert("side".into(), Value::Str(side.into()));
        s.objects.insert(id.clone(), object);
    }
    let hops: Vec<&str> = std::iter::once(client)
        .chain(ids.iter().map(String::as_str))
        .chain(std::iter::once(server))
        .collect();
    for (role, pair) in CHAIN_ROLES.iter().zip(hops.windows(2)) {
        let key = LinkKey {
            role: role.to_string(),
            source: pair[0].to_string(),
            target: pair[1].to_string(),
        };
        let id = s.fresh_link_id(&key);
        s.links
            .insert(id.clone(), Link::new(id, key.role, key.source, key.target));
    }
    Ok(s)
}

/// Objects along the channel leaving `client` through `stub`, ending at
/// the server, or `None` where a hop is missing or ambiguous.
pub fn follow_chain(system: &System, client: &str, stub: &str) -> Option<Vec<String>> {
    system.find_link(&LinkKey {
        role: CHAIN_ROLES[0].into(),
        source: client.into(),
        target: stub.into(),
    })?;
    let mut path = vec![client.to_string(), stub.to_string()];
    for role in &CHAIN_ROLES[1..] {
        let next = system.targets(role, path.last().unwrap());
        if next.len() != 1 {
            return None;
        }
        path.push(next.into_iter().next().unwrap());
    }
    Some(path)
}
