//! Line-oriented text formats for datasets and single networks.
//!
//! Reals are written with Rust's shortest round-trip representation, so
//! `load(save(x)) == x` bit for bit. Blank lines and lines starting with `#`
//! are ignored.
//!
//! Dataset file:
//!
//! ```text
//! arb-dataset 1
//! generator chacha8-latent-v1
//! n 4
//! count 1000
//! seed 42
//! value_range 0.5 2
//! noise 0.05
//! network 0
//! currencies USD EUR GBP JPY
//! row 1 1.32 1.22 1.70
//! row ...              (n rows per network)
//! network 1
//! ...
//! ```
//!
//! A single-network file is `arb-network 1` followed by one `currencies`
//! line and `n` `row` lines.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exchange::{ExchangeNetwork, GeneratorConfig, NetworkDataset};

const DATASET_MAGIC: &str = "arb-dataset";
const NETWORK_MAGIC: &str = "arb-network";
const FORMAT_VERSION: &str = "1";

pub(crate) fn write_reals(out: &mut String, values: impl IntoIterator<Item = f64>) {
    for v in values {
        let _ = write!(out, " {v}");
    }
}

fn write_network_body(out: &mut String, net: &ExchangeNetwork) {
    out.push_str("currencies");
    for c in net.currencies() {
        out.push(' ');
        out.push_str(c);
    }
    out.push('\n');
    for i in 0..net.n() {
        out.push_str("row");
        write_reals(out, net.row(i).iter().copied());
        out.push('\n');
    }
}

pub fn dataset_to_string(ds: &NetworkDataset) -> String {
    let c = &ds.config;
    let mut out = String::new();
    let _ = writeln!(out, "{DATASET_MAGIC} {FORMAT_VERSION}");
    let _ = writeln!(out, "generator {}", ds.generator);
    let _ = writeln!(out, "n {}", c.n);
    let _ = writeln!(out, "count {}", c.count);
    let _ = writeln!(out, "seed {}", c.seed);
    let _ = writeln!(out, "value_range {} {}", c.value_range.0, c.value_range.1);
    let _ = writeln!(out, "noise {}", c.noise);
    for (k, net) in ds.networks.iter().enumerate() {
        let _ = writeln!(out, "network {k}");
        write_network_body(&mut out, net);
    }
    out
}

pub fn network_to_string(net: &ExchangeNetwork) -> String {
    let mut out = format!("{NETWORK_MAGIC} {FORMAT_VERSION}\n");
    write_network_body(&mut out, net);
    out
}

pub fn save_dataset(ds: &NetworkDataset, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, dataset_to_string(ds))?;
    Ok(())
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<NetworkDataset> {
    parse_dataset(&std::fs::read_to_string(path)?)
}

pub fn save_network(net: &ExchangeNetwork, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, network_to_string(net))?;
    Ok(())
}

pub fn load_network(path: impl AsRef<Path>) -> Result<ExchangeNetwork> {
    parse_network(&std::fs::read_to_string(path)?)
}

/// One significant line split into whitespace tokens with their columns.
pub(crate) struct Line<'a> {
    pub number: usize,
    tokens: Vec<(usize, &'a str)>,
}

impl<'a> Line<'a> {
    fn new(number: usize, text: &'a str) -> Self {
        let mut tokens = Vec::new();
        let mut start = None;
        for (pos, ch) in text.char_indices().chain(std::iter::once((text.len(), ' '))) {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(pos),
                (true, Some(s)) => {
                    tokens.push((s + 1, &text[s..pos]));
                    start = None;
                }
                _ => {}
            }
        }
        Self { number, tokens }
    }

    pub fn error(&self, column: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.number,
            column,
            message: message.into(),
        }
    }

    pub fn keyword(&self) -> &'a str {
        self.tokens[0].1
    }

    /// Checks the keyword and returns the remaining tokens.
    pub fn expect(&self, keyword: &str) -> Result<&[(usize, &'a str)]> {
        if self.keyword() != keyword {
            return Err(self.error(
                self.tokens[0].0,
                format!("expected `{keyword}`, found `{}`", self.keyword()),
            ));
        }
        Ok(&self.tokens[1..])
    }

    pub fn values<T: FromStr>(&self, keyword: &str, count: usize) -> Result<Vec<T>> {
        let rest = self.expect(keyword)?;
        if rest.len() != count {
            return Err(self.error(
                self.tokens[0].0,
                format!("`{keyword}` takes {count} value(s), found {}", rest.len()),
            ));
        }
        rest.iter()
            .map(|&(col, tok)| {
                tok.parse::<T>()
                    .map_err(|_| self.error(col, format!("cannot parse `{tok}`")))
            })
            .collect()
    }

    pub fn value<T: FromStr>(&self, keyword: &str) -> Result<T> {
        Ok(self.values(keyword, 1)?.pop().expect("one value"))
    }

    pub fn words(&self, keyword: &str) -> Result<Vec<String>> {
        Ok(self.expect(keyword)?.iter().map(|(_, t)| t.to_string()).collect())
    }
}

/// Iterator over significant lines that reports end-of-input as a parse error.
pub(crate) struct Lines<'a> {
    inner: Box<dyn Iterator<Item = Line<'a>> + 'a>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    pub fn new(text: &'a str) -> Self {
        let last_line = text.lines().count();
        let inner = text.lines().enumerate().filter_map(|(i, l)| {
            let trimmed = l.trim();
            (!trimmed.is_empty() && !trimmed.starts_with('#')).then(|| Line::new(i + 1, l))
        });
        Self {
            inner: Box::new(inner),
            last_line,
        }
    }

    pub fn next_line(&mut self, wanted: &str) -> Result<Line<'a>> {
        self.inner.next().ok_or_else(|| Error::Parse {
            line: self.last_line + 1,
            column: 1,
            message: format!("unexpected end of input, expected `{wanted}`"),
        })
    }

    pub fn finish(mut self) -> Result<()> {
        match self.inner.next() {
            Some(line) => Err(line.error(1, format!("unexpected trailing `{}`", line.keyword()))),
            None => Ok(()),
        }
    }

    pub fn header(&mut self, magic: &str) -> Result<()> {
        let line = self.next_line(magic)?;
        let version: String = line.value(magic)?;
        if version != FORMAT_VERSION {
            return Err(line.error(1, format!("unsupported {magic} version {version}")));
        }
        Ok(())
    }
}

fn parse_network_body(lines: &mut Lines<'_>, expected_n: Option<usize>) -> Result<ExchangeNetwork> {
    let line = lines.next_line("currencies")?;
    let currencies = line.words("currencies")?;
    let n = currencies.len();
    if let Some(want) = expected_n {
        if n != want {
            return Err(line.error(1, format!("expected {want} currencies, found {n}")));
        }
    }
    let mut rates = Vec::with_capacity(n * n);
    for _ in 0..n {
        let row = lines.next_line("row")?;
        rates.extend(row.values::<f64>("row", n)?);
    }
    ExchangeNetwork::new(currencies, rates)
}

pub fn parse_network(text: &str) -> Result<ExchangeNetwork> {
    let mut lines = Lines::new(text);
    lines.header(NETWORK_MAGIC)?;
    let net = parse_network_body(&mut lines, None)?;
    lines.finish()?;
    Ok(net)
}

pub fn parse_dataset(text: &str) -> Result<NetworkDataset> {
    let mut lines = Lines::new(text);
    lines.header(DATASET_MAGIC)?;
    let generator: String = lines.next_line("generator")?.value("generator")?;
    let n: usize = lines.next_line("n")?.value("n")?;
    let count: usize = lines.next_line("count")?.value("count")?;
    let seed: u64 = lines.next_line("seed")?.value("seed")?;
    let range: Vec<f64> = lines.next_line("value_range")?.values("value_range", 2)?;
    let noise: f64 = lines.next_line("noise")?.value("noise")?;
    let config = GeneratorConfig {
        n,
        count,
        seed,
        value_range: (range[0], range[1]),
        noise,
    };
    config.validate().map_err(|e| match e {
        Error::Config(reason) => Error::validation("header", reason),
        other => other,
    })?;

    let mut networks = Vec::with_capacity(count);
    for k in 0..count {
        let line = lines.next_line("network")?;
        let index: usize = line.value("network")?;
        if index != k {
            return Err(line.error(1, format!("expected network {k}, found {index}")));
        }
        let net = parse_network_body(&mut lines, Some(n)).map_err(|e| match e {
            Error::Validation { field, reason } => Error::Validation {
                field: format!("networks[{k}].{field}"),
                reason,
            },
            other => other,
        })?;
        networks.push(net);
    }
    lines.finish()?;
    Ok(NetworkDataset {
        config,
        generator,
        networks,
    })
}
