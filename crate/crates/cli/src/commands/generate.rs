use anyhow::Result;
use cachecast::config;
use cachecast::trace::{trace_to_bytes, TraceFormat};
use cachecast::workload::{default_socal_workload, generate};

use super::{check_scale, read_text, trace_file_name};
use crate::args::{Cli, GenerateArgs};
use crate::manifest::RunManifest;

pub fn run(cli: &Cli, args: &GenerateArgs) -> Result<()> {
    let mut manifest = RunManifest::new(&cli.out)?;
    let mut spec = match &cli.config {
        Some(path) => {
            let text = read_text(path)?;
            manifest.config(path, text.as_bytes());
            config::parse_workload(&text, path)?
        }
        None => {
            check_scale(args.socal_scale)?;
            default_socal_workload(args.socal_scale)
        }
    };
    if let Some(seed) = cli.seed {
        spec.rng_seed = seed;
    }
    manifest.seed("workload", spec.rng_seed);
    let trace = manifest.time("generate", || generate(&spec))?;
    let format: TraceFormat = args.format.into();
    let bytes = manifest.time("encode", || trace_to_bytes(&trace, format));
    let path = manifest.write(&trace_file_name(format, "trace"), &bytes)?;
    manifest.finish()?;
    eprintln!("wrote {} requests to {}", trace.len(), path.display());
    Ok(())
}
