pub mod aaa;
pub mod cauchy;
pub mod gauss;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod portrait;
pub mod quad;
pub mod recipes;
pub mod rule;
pub mod sum;
