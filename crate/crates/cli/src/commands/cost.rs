use nlqc_core::instprotocols::resource_report;

use crate::{CliError, CostArgs, Report, Row};

pub(super) fn run(args: &CostArgs, report: &mut Report) -> Result<(), CliError> {
    report.push(Row::new("resources", resource_report(args.n, args.eps)?));
    Ok(())
}
