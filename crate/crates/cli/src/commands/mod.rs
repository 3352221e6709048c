pub mod extract;
pub mod fit;
pub mod misc;
pub mod simulate;
