//! Plain-text model files.
//!
//! ```text
//! emowalk-model v1
//! kind forest
//! classes -1 1
//! n_features 107
//! seed 42
//! hyperparams n_trees=2 max_depth=none min_samples_split=2 min_samples_leaf=1 max_features=sqrt bootstrap=true
//! tree 3
//! split 12 0.53 1 2
//! leaf -1 20
//! leaf 1 18
//! tree 1
//! leaf 1 38
//! end
//! ```
//!
//! Logistic models carry `mean`, `scale` and one `weights <bias> <w...>`
//! line per binary problem; baselines carry `prior`. Numbers are written in
//! shortest round-trip form, so reading a file back gives identical models.

use std::fmt::Write as _;
use std::str::FromStr;

use emowalk_core::learners::{
    BinaryWeights, Classifier, ForestModel, HyperParams, LearnError, LogisticModel, Matrix, MostFrequentModel, Node,
    Predictions, Tree,
};
use emowalk_core::Label;

pub const MAGIC: &str = "emowalk-model v1";

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Baseline(MostFrequentModel),
    Logistic(LogisticModel),
    Forest(ForestModel),
}

impl Model {
    pub fn predict(&self, x: &Matrix) -> Result<Predictions, LearnError> {
        match self {
            Model::Baseline(m) => m.predict(x),
            Model::Logistic(m) => m.predict(x),
            Model::Forest(m) => m.predict(x),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{MAGIC}").unwrap();
        match self {
            Model::Baseline(m) => {
                writeln!(out, "kind baseline").unwrap();
                writeln!(out, "classes {}", join(m.classes())).unwrap();
                writeln!(out, "prior {}", join(m.prior())).unwrap();
            }
            Model::Logistic(m) => {
                writeln!(out, "kind logistic").unwrap();
                writeln!(out, "classes {}", join(m.classes())).unwrap();
                writeln!(out, "n_features {}", m.n_features()).unwrap();
                writeln!(out, "mean {}", join(m.means())).unwrap();
                writeln!(out, "scale {}", join(m.scales())).unwrap();
                for bw in m.weights() {
                    writeln!(out, "weights {} {}", bw.bias, join(&bw.w)).unwrap();
                }
            }
            Model::Forest(m) => {
                let hp = m.hyperparams();
                writeln!(out, "kind forest").unwrap();
                writeln!(out, "classes {}", join(m.classes())).unwrap();
                writeln!(out, "n_features {}", m.n_features()).unwrap();
                writeln!(out, "seed {}", m.seed()).unwrap();
                writeln!(
                    out,
                    "hyperparams n_trees={} max_depth={} min_samples_split={} min_samples_leaf={} max_features={} bootstrap={}",
                    hp.n_trees,
                    hp.max_depth.map_or("none".to_string(), |d| d.to_string()),
                    hp.min_samples_split,
                    hp.min_samples_leaf,
                    hp.max_features,
                    hp.bootstrap
                )
                .unwrap();
                for t in m.trees() {
                    writeln!(out, "tree {}", t.nodes.len()).unwrap();
                    for n in &t.nodes {
                        match n {
                            Node::Split {
                                feature,
                                threshold,
                                left,
                                right,
                            } => writeln!(out, "split {feature} {threshold} {left} {right}").unwrap(),
                            Node::Leaf { label, samples } => writeln!(out, "leaf {label} {samples}").unwrap(),
                        }
                    }
                }
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Model, ModelParseError> {
        let mut p = Parser::new(text);
        p.expect_exact(MAGIC)?;
        let kind = p.keyed("kind")?.to_string();
        let model = match kind.as_str() {
            "baseline" => {
                let classes = parse_list(&p.keyed("classes")?, p.line)?;
                let prior = parse_list(&p.keyed("prior")?, p.line)?;
                Model::Baseline(MostFrequentModel::from_parts(classes, prior).map_err(|e| p.invalid(e))?)
            }
            "logistic" => {
                let classes: Vec<Label> = parse_list(&p.keyed("classes")?, p.line)?;
                let d: usize = parse_one(&p.keyed("n_features")?, p.line)?;
                let mean: Vec<f64> = parse_list(&p.keyed("mean")?, p.line)?;
                let scale: Vec<f64> = parse_list(&p.keyed("scale")?, p.line)?;
                if mean.len() != d {
                    return Err(p.error("mean length differs from n_features"));
                }
                let n = if classes.len() == 2 { 1 } else { classes.len() };
                let mut weights = Vec::with_capacity(n);
                for _ in 0..n {
                    let v: Vec<f64> = parse_list(&p.keyed("weights")?, p.line)?;
                    let Some((&bias, w)) = v.split_first() else {
                        return Err(p.error("empty weights line"));
                    };
                    weights.push(BinaryWeights { bias, w: w.to_vec() });
                }
                Model::Logistic(LogisticModel::from_parts(classes, mean, scale, weights).map_err(|e| p.invalid(e))?)
            }
            "forest" => {
                let classes: Vec<Label> = parse_list(&p.keyed("classes")?, p.line)?;
                let d: usize = parse_one(&p.keyed("n_features")?, p.line)?;
                let seed: u64 = parse_one(&p.keyed("seed")?, p.line)?;
                let hp = parse_hyperparams(&p.keyed("hyperparams")?, p.line)?;
                let mut trees = Vec::with_capacity(hp.n_trees);
                for _ in 0..hp.n_trees {
                    let n: usize = parse_one(&p.keyed("tree")?, p.line)?;
                    let mut nodes = Vec::with_capacity(n);
                    for _ in 0..n {
                        let (tag, rest) = p.next_pair()?;
                        let f: Vec<&str> = rest.split_whitespace().collect();
                        let node = match (tag, f.len()) {
                            ("split", 4) => Node::Split {
                                feature: parse_one(f[0], p.line)?,
                                threshold: parse_one(f[1], p.line)?,
                                left: parse_one(f[2], p.line)?,
                                right: parse_one(f[3], p.line)?,
                            },
                            ("leaf", 2) => Node::Leaf {
                                label: parse_one(f[0], p.line)?,
                                samples: parse_one(f[1], p.line)?,
                            },
                            _ => return Err(p.error("expected a split or leaf line")),
                        };
                        nodes.push(node);
                    }
                    trees.push(Tree { nodes });
                }
                Model::Forest(ForestModel::from_parts(classes, d, trees, hp, seed).map_err(|e| p.invalid(e))?)
            }
            other => return Err(p.error(format!("unknown model kind {other:?}"))),
        };
        p.expect_exact("end")?;
        if let Some((line, _)) = p.lines.next() {
            return Err(ModelParseError {
                line: line + 1,
                message: "content after end".into(),
            });
        }
        Ok(model)
    }
}

fn join<T: std::fmt::Display>(values: &[T]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ModelParseError {
    pub line: usize,
    pub message: String,
}

fn parse_one<T: FromStr>(s: &str, line: usize) -> Result<T, ModelParseError> {
    s.trim().parse().map_err(|_| ModelParseError {
        line,
        message: format!("cannot parse {s:?}"),
    })
}

fn parse_list<T: FromStr>(s: &str, line: usize) -> Result<Vec<T>, ModelParseError> {
    s.split_whitespace().map(|t| parse_one(t, line)).collect()
}

fn parse_hyperparams(s: &str, line: usize) -> Result<HyperParams, ModelParseError> {
    let mut hp = HyperParams::default();
    let mut seen = 0;
    for pair in s.split_whitespace() {
        let (k, v) = pair.split_once('=').ok_or_else(|| ModelParseError {
            line,
            message: format!("expected key=value, got {pair:?}"),
        })?;
        match k {
            "n_trees" => hp.n_trees = parse_one(v, line)?,
            "max_depth" => hp.max_depth = if v == "none" { None } else { Some(parse_one(v, line)?) },
            "min_samples_split" => hp.min_samples_split = parse_one(v, line)?,
            "min_samples_leaf" => hp.min_samples_leaf = parse_one(v, line)?,
            "max_features" => hp.max_features = parse_one(v, line)?,
            "bootstrap" => hp.bootstrap = parse_one(v, line)?,
            _ => {
                return Err(ModelParseError {
                    line,
                    message: format!("unknown hyperparameter {k:?}"),
                })
            }
        }
        seen += 1;
    }
    if seen != 6 {
        return Err(ModelParseError {
            line,
            message: "expected six hyperparameters".into(),
        });
    }
    Ok(hp)
}

struct Parser<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            lines: text.lines().enumerate(),
            line: 0,
        }
    }

    fn next_line(&mut self) -> Result<&'a str, ModelParseError> {
        match self.lines.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l.trim_end())
            }
            None => Err(ModelParseError {
                line: self.line + 1,
                message: "unexpected end of file".into(),
            }),
        }
    }

    fn error(&self, message: impl Into<String>) -> ModelParseError {
        ModelParseError {
            line: self.line,
            message: message.into(),
        }
    }

    fn invalid(&self, e: LearnError) -> ModelParseError {
        self.error(e.to_string())
    }

    fn expect_exact(&mut self, want: &str) -> Result<(), ModelParseError> {
        let l = self.next_line()?;
        if l != want {
            return Err(self.error(format!("expected {want:?}")));
        }
        Ok(())
    }

    fn next_pair(&mut self) -> Result<(&'a str, &'a str), ModelParseError> {
        let l = self.next_line()?;
        Ok(l.split_once(' ').unwrap_or((l, "")))
    }

    fn keyed(&mut self, key: &str) -> Result<String, ModelParseError> {
        let (k, rest) = self.next_pair()?;
        if k != key {
            return Err(self.error(format!("expected {key:?} line")));
        }
        Ok(rest.to_string())
    }
}
