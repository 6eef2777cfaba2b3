pub mod family2;
pub mod greenpot;
pub mod linalg;
pub mod mapiter;
pub mod numeric;
pub mod polycore;
pub mod specdeg;
