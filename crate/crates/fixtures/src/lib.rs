//! Seeded synthetic datasets shaped like the published analyses, with clean
//! counterparts, and the on-disk corpus built from them.

pub mod batches;
pub mod corpus;
pub mod cisplatin;
pub mod dose;
pub mod doxorubicin;
pub mod labelings;
pub mod panels;
pub mod random;
pub mod roster;
