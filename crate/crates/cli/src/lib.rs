//! Command-line front end: layouts, comparison tables, stability studies
//! and SVG rendering.

pub mod args;
pub mod commands;
pub mod render;
pub mod table;

use treemap_core::Error;

use crate::args::{Cli, Command};

/// Process exit status for an error: 2 for bad invocations or inputs, 1 when
/// the computation itself failed.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_)
        | Error::Parse { .. }
        | Error::Validation(_)
        | Error::ZeroTotalWeight
        | Error::AreaMismatch { .. }
        | Error::Json(_)
        | Error::Io(_) => 2,
        Error::EmptySet
        | Error::NoAreas
        | Error::InvalidGeometry(_)
        | Error::IdMismatch
        | Error::TooLarge { .. }
        | Error::Infeasible(_) => 1,
    }
}

pub fn run(cli: &Cli) -> treemap_core::Result<()> {
    match &cli.command {
        Command::Layout(a) => commands::cmd_layout(a),
        Command::Compare(a) => commands::cmd_compare(a),
        Command::Study(a) => commands::cmd_study(a),
        Command::Render(a) => commands::cmd_render(a),
    }
}
