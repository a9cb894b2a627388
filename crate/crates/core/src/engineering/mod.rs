//! Engineering-viewpoint structures: containment, channels, authorized
//! invocation, migration and remote creation.

mod channel;
mod check;
mod containment;
mod operations;
mod tags;

pub use channel::{build_channel, channel_ids, follow_chain, BINDER, CHAIN_ROLES, PROTOCOL, STUB};
pub use check::check_engineering;
pub use containment::{is_at_level, Containment, Level, CONTAINS, GROUPS, HOSTS};
pub use operations::{
    authorize_invocation, is_authorized, remote_create, transfer_entity, Authorization, DenyReason, SoftwareEntity,
    TravelRequest, ACCEPTS, AUTHORIZED, GRANT, PAYLOAD, REF,
};
pub use tags::{Coordination, EngineeringTag, Management, Repository, Security, UnknownTag};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EngineeringError {
    #[error("model lacks channel elements: {}", .0.join(", "))]
    MissingChannelTemplates(Vec<String>),
    #[error("a channel from {client} to {server} already exists")]
    DuplicateChannel { client: String, server: String },
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("{0} is not a node")]
    UnknownDestination(String),
    #[error("node {node} rejects the credential of {entity}")]
    CredentialRejected { entity: String, node: String },
    #[error("node {0} has no cluster")]
    NoCluster(String),
    #[error("{client} cannot authenticate to {node}")]
    AuthenticationFailed { client: String, node: String },
    #[error("model has no template {0}")]
    MissingTemplate(String),
    #[error("instances of {0} cannot be placed in a cluster")]
    NotContainable(String),
    #[error("bad initial value for {attribute} of {template}")]
    BadInitialValue { template: String, attribute: String },
    #[error("{object} has no usable {attribute}")]
    IncompletePayload { object: String, attribute: String },
}
