pub mod channel;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod measure;
pub mod protocols;
pub mod random;
pub mod report;
pub mod scenario;
pub mod states;
pub mod timeline;
