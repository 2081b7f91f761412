pub mod chains;
pub mod oracles;
