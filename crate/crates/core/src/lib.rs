pub mod checkpoint;
pub mod cli;
pub mod delta;
pub mod error;
pub mod fox;
pub mod groupring;
pub mod maps;
pub mod primitivity;
pub mod verify;
pub mod words;
