pub mod baseline;
pub mod pauli;
pub mod qsci;
pub mod spectrum;
pub mod validate;
