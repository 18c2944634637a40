pub mod algebra;
pub mod curvepts;
pub mod sections;
pub mod classify;
pub mod counts;
pub mod analytic;
pub mod cli;
