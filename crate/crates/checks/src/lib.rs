//! Bundled corpus, independent reference oracles and the acceptance
//! criteria for codebadger.

pub mod corpus;
pub mod criteria;
pub mod gen;
pub mod oracle;
