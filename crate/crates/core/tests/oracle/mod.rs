#![allow(dead_code)]

pub mod partitions;
pub mod rewrites;
