use anyhow::Result;
use cachecast::aggregate::{bin_records, bins_to_csv_string, AggregateError};

use super::load_trace;
use crate::args::{AggregateArgs, Cli};
use crate::manifest::RunManifest;

pub fn bins_file_name(granularity: cachecast::aggregate::Granularity) -> String {
    format!("bins_{granularity}.csv")
}

pub fn run(cli: &Cli, args: &AggregateArgs) -> Result<()> {
    let mut manifest = RunManifest::new(&cli.out)?;
    let mut trace = load_trace(&args.trace, &mut manifest)?;
    if let Some(class) = &args.class {
        trace.records.retain(|r| &r.file_class == class);
    }
    if trace.is_empty() {
        return Err(AggregateError::EmptyTrace.into());
    }
    let bins = manifest.time("bin", || bin_records(&trace.records, args.granularity))?;
    let path = manifest.write(&bins_file_name(args.granularity), bins_to_csv_string(&bins).as_bytes())?;
    manifest.finish()?;
    eprintln!("wrote {} {} bins to {}", bins.len(), args.granularity, path.display());
    Ok(())
}
