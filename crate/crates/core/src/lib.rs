pub mod group;
pub mod linalg;
pub mod cocycle;
pub mod pquotient;
pub mod presentation;
pub mod certificate;
