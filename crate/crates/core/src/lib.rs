// `!(x > 0.0)` is how the parameter checks reject NaN along with the bad range
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod evaluate;
pub mod experiment;
pub mod ingest;
pub mod model;
pub mod online;
pub mod running;
pub mod snapshot;
pub mod synthetic;
pub mod windowing;
