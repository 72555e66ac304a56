//! Shared panel-input flags: a single long-format file or a wide cause/effect
//! file pair, auto-detected by header.

use std::path::PathBuf;

use clap::Args;
use qppa_core::pipeline::{
    ingest_panel_csv, is_long_format, IngestedPanel, PanelSource, WidePanelSource,
};
use qppa_core::Error;

#[derive(Args, Clone)]
pub struct PanelInput {
    /// Long-format CSV with columns member, timestamp, x, y.
    #[arg(long, conflicts_with_all = ["cause", "effect"])]
    pub input: Option<PathBuf>,
    /// Wide-format CSV of the cause variable (member rows, timestamp
    /// columns).
    #[arg(long, requires = "effect")]
    pub cause: Option<PathBuf>,
    /// Wide-format CSV of the effect variable.
    #[arg(long, requires = "cause")]
    pub effect: Option<PathBuf>,
    /// Comma-separated names of the leading label columns in the wide files;
    /// defaults to the first header column.
    #[arg(long, value_delimiter = ',')]
    pub label_cols: Vec<String>,
}

impl PanelInput {
    pub fn is_given(&self) -> bool {
        self.input.is_some() || self.cause.is_some()
    }

    fn default_label_column(path: &PathBuf) -> Result<String, Error> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| Error::Parse {
                path: path.display().to_string(),
                location: "header".into(),
                detail: e.to_string(),
            })?;
        let headers = reader.headers().map_err(|e| Error::Parse {
            path: path.display().to_string(),
            location: "header".into(),
            detail: e.to_string(),
        })?;
        headers
            .iter()
            .next()
            .map(|h| h.trim().to_string())
            .ok_or_else(|| Error::Parse {
                path: path.display().to_string(),
                location: "header".into(),
                detail: "empty header".into(),
            })
    }

    pub fn load(&self) -> Result<IngestedPanel<f64>, Error> {
        let source = match (&self.input, &self.cause, &self.effect) {
            (Some(path), None, None) => {
                if !is_long_format(path)? {
                    return Err(Error::Config {
                        detail: format!(
                            "{} is not long format (member,timestamp,x,y); wide panels \
                             need --cause and --effect",
                            path.display()
                        ),
                    });
                }
                PanelSource::Long(path.clone())
            }
            (None, Some(cause), Some(effect)) => {
                let label_columns = if self.label_cols.is_empty() {
                    vec![Self::default_label_column(cause)?]
                } else {
                    self.label_cols.clone()
                };
                PanelSource::Wide(WidePanelSource {
                    cause_path: cause.clone(),
                    effect_path: effect.clone(),
                    label_columns,
                })
            }
            _ => {
                return Err(Error::Config {
                    detail: "give either --input or both --cause and --effect".into(),
                })
            }
        };
        ingest_panel_csv(&source)
    }
}
