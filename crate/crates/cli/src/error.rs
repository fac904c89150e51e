use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("not a primitive cylinder: {0}")]
    NotPrimitive(String),
    #[error("out of primitive scope: {0}")]
    OutOfScope(String),
    #[error("identity violated at k = {k}: {what}: {lhs} != {rhs}")]
    Identity {
        k: usize,
        what: String,
        lhs: u64,
        rhs: u64,
    },
    #[error("unknown render target `{0}`")]
    RenderTarget(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::NotPrimitive(_) => 3,
            CliError::OutOfScope(_) => 4,
            CliError::Identity { .. } => 5,
            CliError::RenderTarget(_) => 6,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<tropcyl_core::CylinderError> for CliError {
    fn from(e: tropcyl_core::CylinderError) -> Self {
        if e.is_not_primitive() {
            CliError::NotPrimitive(e.to_string())
        } else {
            CliError::Parse(format!("invalid cylinder: {e}"))
        }
    }
}

impl From<tropcyl_core::CountError> for CliError {
    fn from(e: tropcyl_core::CountError) -> Self {
        use tropcyl_core::CountError;
        match e {
            CountError::OutOfPrimitiveScope { .. } | CountError::RepeatedLeafRay(_) => {
                CliError::OutOfScope(e.to_string())
            }
            CountError::Cylinder(c) => c.into(),
            CountError::ComponentOutOfRange { .. } | CountError::Class(_) => {
                CliError::Parse(e.to_string())
            }
        }
    }
}

impl From<tropcyl_core::DeformationError> for CliError {
    fn from(e: tropcyl_core::DeformationError) -> Self {
        use tropcyl_core::DeformationError as D;
        match e {
            D::IdentityViolation {
                k,
                identity,
                lhs,
                rhs,
            } => CliError::Identity {
                k,
                what: identity.to_string(),
                lhs,
                rhs,
            },
            D::EndpointMismatch(what) => CliError::Identity {
                k: 0,
                what: what.to_string(),
                lhs: 0,
                rhs: 0,
            },
            D::NotPrimitive(c) | D::Cylinder(c) => c.into(),
            D::Count(c) => c.into(),
            D::AnchorOrderViolation { .. } | D::AnchorOnWall(_) => CliError::Parse(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}
