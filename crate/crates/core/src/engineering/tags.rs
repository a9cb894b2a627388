//! Function-group tags carried by object templates.

use std::fmt;
use std::str::FromStr;

macro_rules! function_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }

            fn parse(s: &str) -> Option<$name> {
                match s {
                    $($text => Some($name::$variant),)+
                    _ => None,
                }
            }
        }
    };
}

function_enum!(
    /// Management functions.
    Management {
        Node => "node",
        Object => "object",
        Cluster => "cluster",
        Capsule => "capsule",
    }
);

function_enum!(
    /// Coordination functions.
    Coordination {
        EventNotification => "eventNotification",
        CheckpointRecovery => "checkpointRecovery",
        DeactivationReactivation => "deactivationReactivation",
        Group => "group",
        Migration => "migration",
        InterfaceRefTracking => "interfaceRefTracking",
        Transaction => "transaction",
    }
);

function_enum!(
    /// Repository functions.
    Repository {
        Storage => "storage",
        InformationOrganization => "informationOrganization",
        Relocation => "relocation",
        TypeRepository => "typeRepository",
        Trading => "trading",
    }
);

function_enum!(
    /// Security functions.
    Security {
        AccessControl => "accessControl",
        Authentication => "authentication",
        SecurityAudit => "securityAudit",
        KeyManagement => "keyManagement",
        ConfidentialityIntegrity => "confidentialityIntegrity",
    }
);

/// A `group.function` tag, e.g. `management.node`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EngineeringTag {
    Management(Management),
    Coordination(Coordination),
    Repository(Repository),
    Security(Security),
}

impl EngineeringTag {
    pub fn group(self) -> &'static str {
        match self {
            EngineeringTag::Management(_) => "management",
            EngineeringTag::Coordination(_) => "coordination",
            EngineeringTag::Repository(_) => "repository",
            EngineeringTag::Security(_) => "security",
        }
    }

    pub fn function(self) -> &'static str {
        match self {
            EngineeringTag::Management(f) => f.as_str(),
            EngineeringTag::Coordination(f) => f.as_str(),
            EngineeringTag::Repository(f) => f.as_str(),
            EngineeringTag::Security(f) => f.as_str(),
        }
    }

    /// Every tag, group by group.
    pub fn all() -> impl Iterator<Item = EngineeringTag> {
        Management::ALL
            .iter()
            .map(|f| EngineeringTag::Management(*f))
            .chain(Coordination::ALL.iter().map(|f| EngineeringTag::Coordination(*f)))
            .chain(Repository::ALL.iter().map(|f| EngineeringTag::Repository(*f)))
            .chain(Security::ALL.iter().map(|f| EngineeringTag::Security(*f)))
    }
}

impl fmt::Display for EngineeringTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.group(), self.function())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown engineering tag `{0}`")]
pub struct UnknownTag(pub String);

impl FromStr for EngineeringTag {
    type Err = UnknownTag;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || UnknownTag(s.to_string());
        let (group, function) = s.split_once('.').ok_or_else(err)?;
        let tag = match group {
            "management" => Management::parse(function).map(EngineeringTag::Management),
            "coordination" => Coordination::parse(function).map(EngineeringTag::Coordination),
            "repository" => Repository::parse(function).map(EngineeringTag::Repository),
            "security" => Security::parse(function).map(EngineeringTag::Security),
            _ => None,
        };
        tag.ok_or_else(err)
    }
}
