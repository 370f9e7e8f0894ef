pub mod care_co;
pub mod care_no;
pub mod cli;
pub mod flow;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod pea;
pub mod rng;
