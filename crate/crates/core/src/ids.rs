//! Opaque identifier newtypes.
//!
//! Identifiers are supplied by the input data and never synthesized, so
//! fixtures and exports stay stable across runs.

use serde::{Deserialize, Serialize};
use std::fmt;

macro_rules! define_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(id: &str) -> Self {
                Self(id.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(id: String) -> Self {
                Self(id)
            }
        }
    };
}

define_id!(
    /// First-level administrative division.
    RegionId
);
define_id!(
    /// A university (supply side).
    UniversityId
);
define_id!(
    /// A single located seat of a private enterprise (demand side).
    /// Two seats of the same company in different locations are distinct.
    SeatId
);
define_id!(
    /// Scientific disciplinary sector code.
    SdsId
);
define_id!(
    /// Publication record identifier.
    PublicationId
);
