//! Model checkpoints: the training configuration followed by every weight
//! matrix in row-major order, reals in shortest round-trip form.
//!
//! ```text
//! arb-gnn 1
//! layers 3
//! hidden 64
//! ...
//! mode budget-cap
//! matrix 0 64 3
//! w 0.12 -0.03 0.2
//! ...
//! ```

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use super::{GnnConfig, GnnParams};
use crate::error::{Error, Result};
use crate::format::{write_reals, Lines};

const MAGIC: &str = "arb-gnn";

pub fn checkpoint_to_string(cfg: &GnnConfig, params: &GnnParams) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} 1");
    let _ = writeln!(out, "layers {}", cfg.layers);
    let _ = writeln!(out, "hidden {}", cfg.hidden);
    let _ = writeln!(out, "input_dim {}", cfg.input_dim);
    let _ = writeln!(out, "activation {}", cfg.activation.as_str());
    let _ = writeln!(out, "lambda {}", cfg.lambda);
    let _ = writeln!(out, "learning_rate {}", cfg.learning_rate);
    let _ = writeln!(out, "epochs {}", cfg.epochs);
    let _ = writeln!(out, "batch_size {}", cfg.batch_size);
    let _ = writeln!(out, "seed {}", cfg.seed);
    let _ = writeln!(out, "adam {} {} {}", cfg.beta1, cfg.beta2, cfg.epsilon);
    let _ = writeln!(out, "budget {}", cfg.budget);
    let _ = writeln!(out, "mode {}", cfg.mode.as_str());
    let _ = writeln!(out, "currencies {}", params.currencies());
    for (l, w) in params.weights.iter().enumerate() {
        let _ = writeln!(out, "matrix {l} {} {}", w.nrows(), w.ncols());
        for row in w.rows() {
            out.push('w');
            write_reals(&mut out, row.iter().copied());
            out.push('\n');
        }
    }
    out
}

pub fn parse_checkpoint(text: &str) -> Result<(GnnConfig, GnnParams)> {
    let mut lines = Lines::new(text);
    lines.header(MAGIC)?;
    let mut cfg = GnnConfig {
        layers: lines.next_line("layers")?.value("layers")?,
        hidden: lines.next_line("hidden")?.value("hidden")?,
        input_dim: lines.next_line("input_dim")?.value("input_dim")?,
        ..Default::default()
    };
    let line = lines.next_line("activation")?;
    cfg.activation = line
        .value::<String>("activation")?
        .parse()
        .map_err(|e: Error| line.error(1, e.to_string()))?;
    cfg.lambda = lines.next_line("lambda")?.value("lambda")?;
    cfg.learning_rate = lines.next_line("learning_rate")?.value("learning_rate")?;
    cfg.epochs = lines.next_line("epochs")?.value("epochs")?;
    cfg.batch_size = lines.next_line("batch_size")?.value("batch_size")?;
    cfg.seed = lines.next_line("seed")?.value("seed")?;
    let adam: Vec<f64> = lines.next_line("adam")?.values("adam", 3)?;
    (cfg.beta1, cfg.beta2, cfg.epsilon) = (adam[0], adam[1], adam[2]);
    cfg.budget = lines.next_line("budget")?.value("budget")?;
    let line = lines.next_line("mode")?;
    cfg.mode = line
        .value::<String>("mode")?
        .parse()
        .map_err(|e: Error| line.error(1, e.to_string()))?;
    cfg.validate().map_err(|e| Error::validation("config", e.to_string()))?;
    let n: usize = lines.next_line("currencies")?.value("currencies")?;

    let mut weights = Vec::new();
    for (l, (rows, cols)) in GnnParams::shapes(&cfg, n).into_iter().enumerate() {
        let line = lines.next_line("matrix")?;
        let dims: Vec<usize> = line.values("matrix", 3)?;
        if dims != [l, rows, cols] {
            return Err(line.error(1, format!("expected matrix {l} {rows} {cols}, found {dims:?}")));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(lines.next_line("w")?.values::<f64>("w", cols)?);
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(
                format!("matrix {l}[{}][{}]", k / cols, k % cols),
                "must be finite",
            ));
        }
        weights.push(Array2::from_shape_vec((rows, cols), data).expect("sized above"));
    }
    lines.finish()?;
    Ok((cfg, GnnParams { weights }))
}

pub fn save_checkpoint(cfg: &GnnConfig, params: &GnnParams, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, checkpoint_to_string(cfg, params))?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(GnnConfig, GnnParams)> {
    parse_checkpoint(&std::fs::read_to_string(path)?)
}
