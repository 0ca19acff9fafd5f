pub mod simulate;
pub mod special;
pub mod surface;
pub mod sweep;
pub mod verify;
