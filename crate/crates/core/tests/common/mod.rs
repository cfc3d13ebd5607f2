#![allow(dead_code)]

pub mod fixtures;
pub mod gradcheck;
pub mod nsga_oracle;
pub mod oracle;
