//! Input formats and command handlers behind the `intnum` binary.

pub mod commands;
pub mod format;
