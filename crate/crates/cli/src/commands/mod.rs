//! One module per subcommand; each appends rows and extras to the report.

mod bound;
mod cost;
mod inst;
mod mub;
mod pbt;
mod posverify;

use crate::{usage, Cli, CliError, Command, Report};

pub(crate) fn dispatch(cli: &Cli, report: &mut Report) -> Result<(), CliError> {
    if cli.max_dim == 0 {
        return Err(usage("--max-dim must be positive"));
    }
    match &cli.command {
        Command::Pbt(a) => pbt::run_pbt(cli, a, report),
        Command::Pgm(a) => pbt::run_pgm(cli, a, report),
        Command::Inst(a) => inst::run(cli, a, report),
        Command::Mub(a) => mub::run(a, report),
        Command::Bound(a) => bound::run(cli, a, report),
        Command::Posverify(a) => posverify::run(cli, a, report),
        Command::Cost(a) => cost::run(a, report),
    }
}
