pub mod dof;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod scheme;
pub mod sweep;
pub mod transceiver;
