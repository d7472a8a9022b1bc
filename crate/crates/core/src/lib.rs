pub mod algebra;
pub mod bridge;
pub mod cli;
pub mod extension;
pub mod io;
pub mod pencil;
pub mod quadruple;
pub mod random;
pub mod report;
pub mod sbp;
pub mod semigroup;
