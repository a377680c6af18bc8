//! Versioned text format for trained models.
//!
//! ```text
//! cachecast-lstm 1
//! target <name>
//! granularity <hourly|daily>
//! window_length <n>
//! smoothing_window <n>
//! input_size <n>
//! hidden_units <h>
//! feature_mins <v>...
//! feature_ranges <v>...
//! target_min <v>
//! target_range <v>
//! weights <rows> <cols>
//! <one line of cols values per row>
//! bias <v>...
//! head_weights <v>...
//! head_bias <v>
//! ```
//!
//! Floats use the shortest round-trip representation, so writing a model
//! read from this format reproduces it byte for byte.

use std::fmt::Write as _;
use std::str::FromStr;

use ndarray::{Array1, Array2};

use super::config::ForecastTarget;
use super::dataset::MinMaxScaler;
use super::evaluate::ForecastRun;
use super::lstm::LstmParams;
use super::ForecastError;
use crate::aggregate::Granularity;

pub const MODEL_MAGIC: &str = "cachecast-lstm";
pub const MODEL_VERSION: u32 = 1;

/// Parameters plus everything needed to apply them to new bins.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub target: ForecastTarget,
    pub granularity: Granularity,
    pub window_length: usize,
    pub smoothing_window: usize,
    pub feature_scaler: MinMaxScaler,
    pub target_scaler: MinMaxScaler,
    pub params: LstmParams<f32>,
}

impl TrainedModel {
    pub fn from_run(run: &ForecastRun) -> Self {
        TrainedModel {
            target: run.config.target,
            granularity: run.granularity,
            window_length: run.window_length,
            smoothing_window: run.smoothing_window,
            feature_scaler: run.train.feature_scaler.clone(),
            target_scaler: run.train.target_scaler.clone(),
            params: run.params.clone(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let p = &self.params;
        let join64 = |v: &[f64]| v.iter().map(|x| ryu::Buffer::new().format(*x).to_owned()).collect::<Vec<_>>().join(" ");
        let join32 = |v: &[f32]| v.iter().map(|x| ryu::Buffer::new().format(*x).to_owned()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "{MODEL_MAGIC} {MODEL_VERSION}");
        let _ = writeln!(out, "target {}", self.target);
        let _ = writeln!(out, "granularity {}", self.granularity);
        let _ = writeln!(out, "window_length {}", self.window_length);
        let _ = writeln!(out, "smoothing_window {}", self.smoothing_window);
        let _ = writeln!(out, "input_size {}", p.input_size());
        let _ = writeln!(out, "hidden_units {}", p.hidden());
        let _ = writeln!(out, "feature_mins {}", join64(&self.feature_scaler.mins));
        let _ = writeln!(out, "feature_ranges {}", join64(&self.feature_scaler.ranges));
        let _ = writeln!(out, "target_min {}", join64(&self.target_scaler.mins));
        let _ = writeln!(out, "target_range {}", join64(&self.target_scaler.ranges));
        let w = p.weights();
        let _ = writeln!(out, "weights {} {}", w.nrows(), w.ncols());
        for row in w.rows() {
            let _ = writeln!(out, "{}", join32(&row.to_vec()));
        }
        let _ = writeln!(out, "bias {}", join32(&p.bias().to_vec()));
        let _ = writeln!(out, "head_weights {}", join32(&p.head_weights().to_vec()));
        let _ = writeln!(out, "head_bias {}", join32(&[p.head_bias()]));
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ForecastError> {
        let mut lines = Lines { inner: text.lines().enumerate() };
        let (line, header) = lines.next_line()?;
        if header != format!("{MODEL_MAGIC} {MODEL_VERSION}") {
            return Err(model_err(line, format!("expected header {MODEL_MAGIC:?} version {MODEL_VERSION}")));
        }
        let target = lines.scalar::<ForecastTarget>("target")?;
        let granularity = lines.scalar::<Granularity>("granularity")?;
        let window_length = lines.scalar::<usize>("window_length")?;
        let smoothing_window = lines.scalar::<usize>("smoothing_window")?;
        let input_size = lines.scalar::<usize>("input_size")?;
        let hidden = lines.scalar::<usize>("hidden_units")?;
        let feature_scaler = MinMaxScaler {
            mins: lines.values("feature_mins", Some(input_size))?,
            ranges: lines.values("feature_ranges", Some(input_size))?,
        };
        let target_scaler =
            MinMaxScaler { mins: lines.values("target_min", Some(1))?, ranges: lines.values("target_range", Some(1))? };
        let (line, rest) = lines.keyed("weights")?;
        let dims: Vec<usize> = parse_values(line, rest, Some(2))?;
        if dims != [input_size + hidden, 4 * hidden] {
            return Err(model_err(
                line,
                format!("weights are {}x{}, expected {}x{}", dims[0], dims[1], input_size + hidden, 4 * hidden),
            ));
        }
        let mut w = Vec::with_capacity(dims[0] * dims[1]);
        for _ in 0..dims[0] {
            let (line, text) = lines.next_line()?;
            w.extend(parse_values::<f32>(line, text, Some(dims[1]))?);
        }
        let bias = lines.values::<f32>("bias", Some(4 * hidden))?;
        let head_w = lines.values::<f32>("head_weights", Some(hidden))?;
        let head_b = lines.values::<f32>("head_bias", Some(1))?[0];
        let params = LstmParams::from_parts(
            Array2::from_shape_vec((dims[0], dims[1]), w).expect("checked"),
            Array1::from(bias),
            Array1::from(head_w),
            head_b,
        )
        .map_err(|e| model_err(line, e.to_string()))?;
        Ok(TrainedModel { target, granularity, window_length, smoothing_window, feature_scaler, target_scaler, params })
    }
}

fn model_err(line: usize, reason: impl Into<String>) -> ForecastError {
    ForecastError::ModelFormat { line, reason: reason.into() }
}

fn parse_values<T: FromStr>(line: usize, text: &str, expected: Option<usize>) -> Result<Vec<T>, ForecastError> {
    let values = text
        .split_whitespace()
        .map(|t| t.parse::<T>().map_err(|_| model_err(line, format!("cannot parse {t:?}"))))
        .collect::<Result<Vec<T>, _>>()?;
    match expected {
        Some(n) if values.len() != n => Err(model_err(line, format!("expected {n} values, found {}", values.len()))),
        _ => Ok(values),
    }
}

struct Lines<'a, I: Iterator<Item = (usize, &'a str)>> {
    inner: I,
}

impl<'a, I: Iterator<Item = (usize, &'a str)> + Clone> Lines<'a, I> {
    fn next_line(&mut self) -> Result<(usize, &'a str), ForecastError> {
        let last = self.peek_line().0;
        self.inner.next().map(|(i, l)| (i + 1, l)).ok_or_else(|| model_err(last, "unexpected end of model"))
    }

    fn peek_line(&self) -> (usize, &'a str) {
        self.inner.clone().next().map_or((0, ""), |(i, l)| (i + 1, l))
    }

    fn keyed(&mut self, key: &str) -> Result<(usize, &'a str), ForecastError> {
        let (line, text) = self.next_line()?;
        match text.split_once(' ') {
            Some((k, rest)) if k == key => Ok((line, rest)),
            _ => Err(model_err(line, format!("expected {key:?}"))),
        }
    }

    fn scalar<T: FromStr>(&mut self, key: &str) -> Result<T, ForecastError> {
        let (line, rest) = self.keyed(key)?;
        rest.trim().parse().map_err(|_| model_err(line, format!("invalid {key} {rest:?}")))
    }

    fn values<T: FromStr>(&mut self, key: &str, expected: Option<usize>) -> Result<Vec<T>, ForecastError> {
        let (line, rest) = self.keyed(key)?;
        parse_values(line, rest, expected)
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn model() -> TrainedModel {
        TrainedModel {
            target: ForecastTarget::AvgHitThroughput,
            granularity: Granularity::Daily,
            window_length: 7,
            smoothing_window: 24,
            feature_scaler: MinMaxScaler { mins: vec![0.5; 8], ranges: vec![1.0 / 3.0; 8] },
            target_scaler: MinMaxScaler { mins: vec![-2.0], ranges: vec![1e12] },
            params: LstmParams::init(8, 3, &mut ChaCha8Rng::seed_from_u64(9)),
        }
    }

    #[test]
    fn text_round_trip_is_exact() {
        let m = model();
        let text = m.to_text();
        let back = TrainedModel::from_text(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = model().to_text().replace("hidden_units 3", "hidden_units 4");
        match TrainedModel::from_text(&text) {
            Err(ForecastError::ModelFormat { line, .. }) => assert_eq!(line, 12),
            other => panic!("{other:?}"),
        }
        let truncated: String = model().to_text().lines().take(14).collect::<Vec<_>>().join("\n");
        assert!(matches!(TrainedModel::from_text(&truncated), Err(ForecastError::ModelFormat { .. })));
        assert!(matches!(TrainedModel::from_text("other 1\n"), Err(ForecastError::ModelFormat { line: 1, .. })));
    }
}
