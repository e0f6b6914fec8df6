pub mod apps;
pub mod hrl;
pub mod intent;
pub mod network;
pub mod runtime;
pub mod scenario;
pub mod sim;
pub mod validation;
