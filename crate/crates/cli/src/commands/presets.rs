use anyhow::Result;
use cachecast::config::to_toml_string;
use cachecast::forecast::ForecastConfig;
use cachecast::simulate::default_socal_federation;
use cachecast::workload::default_socal_workload;

use super::check_scale;
use crate::args::{Cli, PresetsArgs};
use crate::manifest::RunManifest;

pub fn run(cli: &Cli, args: &PresetsArgs) -> Result<()> {
    check_scale(args.socal_scale)?;
    let mut manifest = RunManifest::new(&cli.out)?;
    manifest.write("workload.toml", to_toml_string(&default_socal_workload(args.socal_scale))?.as_bytes())?;
    manifest.write("federation.toml", to_toml_string(&default_socal_federation(args.socal_scale))?.as_bytes())?;
    manifest.write("forecast.toml", to_toml_string(&ForecastConfig::default())?.as_bytes())?;
    manifest.finish()?;
    Ok(())
}
