//! TOML system and element files.
//!
//! A system file looks like
//!
//! ```toml
//! points = 3
//! fiber_dim = 1
//!
//! [group]
//! kind = "cyclic"
//! order = 2
//!
//! [action]
//! generator_images = [[1, 0, 2]]
//!
//! [[cocycle]]
//! g = 1
//! x = 2
//! matrix = [[[-1.0, 0.0]]]
//! ```
//!
//! Group elements are numbered as follows: `cyclic` uses `k ↦ g^k`,
//! `permutations` the breadth-first order of words in the generators with the
//! identity first, and `cayley` the row order of the table. Cocycle entries
//! not listed are the identity; complex numbers are `[re, im]`.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use loctraj_core::algebra::{AElement, CPElement};
use loctraj_core::dynamics::{validate, DynSystem, FiniteGroup, RawSystem};
use loctraj_core::{CMatrix, Tolerances, C64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub type Complex = [f64; 2];
pub type MatrixRows = Vec<Vec<Complex>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub points: usize,
    #[serde(default = "one")]
    pub fiber_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_partition: Option<Vec<Vec<usize>>>,
    pub group: GroupSpec,
    pub action: ActionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cocycle: Vec<CocycleEntry>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GroupSpec {
    Cyclic { order: usize },
    Permutations { letters: usize, generators: Vec<Vec<usize>> },
    Cayley { table: Vec<Vec<usize>> },
}

/// Exactly one of the two fields must be present. `table[g][x] = σ_g(x)`;
/// `generator_images` lists `σ` on the group generators (the element `1` for
/// cyclic groups).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_images: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invert_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleEntry {
    pub g: usize,
    pub x: usize,
    pub matrix: MatrixRows,
}

/// Element files list terms `f(g) += c` at one point or at every point, with
/// `c` a scalar (times the identity) or a full fiber matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementFile {
    #[serde(default)]
    pub term: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub g: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalar: Option<Complex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixRows>,
}

/// Resolves `path`, falling back to `path.toml` when `path` does not exist.
pub fn resolve(path: &Path) -> PathBuf {
    if !path.exists() && path.extension().is_none() {
        let with_ext = path.with_extension("toml");
        if with_ext.exists() {
            return with_ext;
        }
    }
    path.to_path_buf()
}

fn read(path: &Path) -> Result<String, CliError> {
    let resolved = resolve(path);
    fs::read_to_string(&resolved).map_err(|e| CliError::Io {
        path: resolved.display().to_string(),
        message: e.to_string(),
    })
}

pub fn parse_system(text: &str) -> Result<SystemFile, CliError> {
    toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

pub fn parse_element(text: &str) -> Result<ElementFile, CliError> {
    toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

pub fn load_system_file(path: &Path) -> Result<SystemFile, CliError> {
    parse_system(&read(path)?)
}

pub fn load_element_file(path: &Path) -> Result<ElementFile, CliError> {
    parse_element(&read(path)?)
}

pub fn to_toml<T: Serialize>(value: &T) -> String {
    toml::to_string(value).expect("file types serialize to TOML")
}

fn field(name: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Field {
        field: name.into(),
        message: message.into(),
    }
}

fn complex(c: &Complex) -> C64 {
    C64::new(c[0], c[1])
}

fn matrix_from_rows(name: &str, rows: &MatrixRows, n: usize) -> Result<CMatrix, CliError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(field(name, format!("expected a {n}x{n} matrix")));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| complex(&rows[i][j])))
}

pub fn matrix_rows(m: &CMatrix) -> MatrixRows {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Builds `σ` on the whole group from its values on generators by a
/// breadth-first walk `σ_{s·h} = σ_s ∘ σ_h`. Consistency is left to
/// validation, which rejects any table that is not a homomorphism.
fn action_from_generators(
    group: &FiniteGroup,
    generators: &[usize],
    images: &[Vec<usize>],
    points: usize,
) -> Result<Vec<Vec<usize>>, CliError> {
    if images.len() != generators.len() {
        return Err(field(
            "action.generator_images",
            format!("expected {} generator images, found {}", generators.len(), images.len()),
        ));
    }
    for (i, img) in images.iter().enumerate() {
        if img.len() != points || img.iter().any(|&y| y >= points) {
            return Err(field(
                format!("action.generator_images[{i}]"),
                format!("expected {points} point indices below {points}"),
            ));
        }
    }
    let mut sigma: Vec<Option<Vec<usize>>> = vec![None; group.order()];
    sigma[group.identity()] = Some((0..points).collect());
    let mut queue = std::collections::VecDeque::from([group.identity()]);
    while let Some(h) = queue.pop_front() {
        let current = sigma[h].clone().expect("visited");
        for (&s, img) in generators.iter().zip(images) {
            let next = group.mul(s, h);
            if sigma[next].is_none() {
                sigma[next] = Some(current.iter().map(|&y| img[y]).collect());
                queue.push_back(next);
            }
        }
    }
    sigma
        .into_iter()
        .enumerate()
        .map(|(g, s)| s.ok_or_else(|| field("group", format!("element {g} is not reached from the generators"))))
        .collect()
}

impl SystemFile {
    /// Lowers the file to the unvalidated core description.
    pub fn to_raw(&self) -> Result<RawSystem, CliError> {
        let (group, generators) = match &self.group {
            GroupSpec::Cyclic { order } => {
                if *order == 0 {
                    return Err(field("group.order", "order must be at least 1"));
                }
                let g = FiniteGroup::cyclic(*order);
                let gens = if *order > 1 { vec![1] } else { vec![] };
                (g, Some(gens))
            }
            GroupSpec::Permutations { letters, generators } => {
                let (g, perms) = FiniteGroup::from_permutations(*letters, generators)?;
                let gens = generators
                    .iter()
                    .map(|p| perms.iter().position(|q| q == p).expect("generator is an element"))
                    .collect();
                (g, Some(gens))
            }
            GroupSpec::Cayley { table } => (FiniteGroup::from_cayley(table)?, None),
        };

        let sigma = match (&self.action.table, &self.action.generator_images) {
            (Some(table), None) => table.clone(),
            (None, Some(images)) => {
                let Some(generators) = generators else {
                    return Err(field(
                        "action.generator_images",
                        "a cayley group has no generators; give action.table instead",
                    ));
                };
                // The trivial group has no generators: accept one identity image.
                let images: &[Vec<usize>] = if generators.is_empty() && images.len() == 1 {
                    &[]
                } else {
                    images
                };
                action_from_generators(&group, &generators, images, self.points)?
            }
            _ => {
                return Err(field(
                    "action",
                    "give exactly one of action.table and action.generator_images",
                ))
            }
        };

        let n = self.fiber_dim;
        let cocycle = if self.cocycle.is_empty() {
            None
        } else {
            let mut table = vec![vec![CMatrix::identity(n); self.points]; group.order()];
            let mut seen = BTreeSet::new();
            for (i, entry) in self.cocycle.iter().enumerate() {
                let name = format!("cocycle[{i}]");
                if entry.g >= group.order() || entry.x >= self.points {
                    return Err(field(name, format!("(g={}, x={}) is out of range", entry.g, entry.x)));
                }
                if !seen.insert((entry.g, entry.x)) {
                    return Err(field(name, format!("duplicate entry for (g={}, x={})", entry.g, entry.x)));
                }
                table[entry.g][entry.x] = matrix_from_rows(&format!("{name}.matrix"), &entry.matrix, n)?;
            }
            Some(table)
        };

        let defaults = Tolerances::default();
        let given = self.tolerances.clone().unwrap_or(ToleranceSpec {
            rank_tol: None,
            invert_tol: None,
            norm_tol: None,
        });
        let tolerances = Tolerances {
            rank_tol: given.rank_tol.unwrap_or(defaults.rank_tol),
            invert_tol: given.invert_tol.unwrap_or(defaults.invert_tol),
            norm_tol: given.norm_tol.unwrap_or(defaults.norm_tol),
        };

        Ok(RawSystem {
            cayley: group.cayley_table(),
            points: self.points,
            sigma,
            fiber_dim: n,
            cocycle,
            z_partition: self.z_partition.clone(),
            tolerances,
        })
    }

    /// Explicit description of a raw system: cayley table, action table,
    /// non-identity cocycle entries and all tolerances.
    pub fn canonical(raw: &RawSystem) -> Self {
        let n = raw.fiber_dim;
        let identity = CMatrix::identity(n);
        let mut cocycle = Vec::new();
        if let Some(table) = &raw.cocycle {
            for (g, row) in table.iter().enumerate() {
                for (x, v) in row.iter().enumerate() {
                    if *v != identity {
                        cocycle.push(CocycleEntry {
                            g,
                            x,
                            matrix: matrix_rows(v),
                        });
                    }
                }
            }
        }
        let z_partition = raw.z_partition.as_ref().map(|blocks| {
            let mut blocks: Vec<Vec<usize>> = blocks
                .iter()
                .map(|b| {
                    let mut b = b.clone();
                    b.sort_unstable();
                    b
                })
                .collect();
            blocks.sort();
            blocks
        });
        Self {
            name: None,
            points: raw.points,
            fiber_dim: n,
            z_partition,
            group: GroupSpec::Cayley {
                table: raw.cayley.clone(),
            },
            action: ActionSpec {
                generator_images: None,
                table: Some(raw.sigma.clone()),
            },
            tolerances: Some(ToleranceSpec {
                rank_tol: Some(raw.tolerances.rank_tol),
                invert_tol: Some(raw.tolerances.invert_tol),
                norm_tol: Some(raw.tolerances.norm_tol),
            }),
            cocycle,
        }
    }
}

/// `sha256:` digest of the canonical form.
pub fn digest(raw: &RawSystem) -> String {
    let text = to_toml(&SystemFile::canonical(raw));
    format!("sha256:{:x}", Sha256::digest(text.as_bytes()))
}

/// Parses and validates a system file.
pub fn load_system(path: &Path) -> Result<DynSystem, CliError> {
    let raw = load_system_file(path)?.to_raw()?;
    Ok(validate(raw)?)
}

impl ElementFile {
    pub fn to_element(&self, system: &DynSystem) -> Result<CPElement, CliError> {
        let n = system.fiber_dim();
        let order = system.group().order();
        let mut f = CPElement::zero(system);
        for (i, t) in self.term.iter().enumerate() {
            let name = format!("term[{i}]");
            if t.g >= order {
                return Err(field(format!("{name}.g"), format!("group element {} out of range", t.g)));
            }
            let fiber = match (&t.scalar, &t.matrix) {
                (Some(c), None) => CMatrix::identity(n).scale(complex(c)),
                (None, Some(rows)) => matrix_from_rows(&format!("{name}.matrix"), rows, n)?,
                _ => return Err(field(name, "give exactly one of scalar and matrix")),
            };
            let points: Vec<usize> = match t.x {
                Some(x) if x >= system.points() => {
                    return Err(field(format!("{name}.x"), format!("point {x} out of range")))
                }
                Some(x) => vec![x],
                None => (0..system.points()).collect(),
            };
            let mut blocks = vec![CMatrix::zeros(n, n); system.points()];
            for x in points {
                blocks[x] = fiber.clone();
            }
            let a = AElement::from_blocks(system, blocks)?;
            f = f.add(&CPElement::delta(system, t.g, a));
        }
        Ok(f)
    }

    /// One matrix term per nonzero fiber block.
    pub fn from_element(f: &CPElement) -> Self {
        let mut term = Vec::new();
        for (g, a) in f.coeffs().iter().enumerate() {
            for (x, block) in a.blocks().iter().enumerate() {
                if !block.is_zero() {
                    term.push(Term {
                        g,
                        x: Some(x),
                        scalar: None,
                        matrix: Some(matrix_rows(block)),
                    });
                }
            }
        }
        Self { term }
    }
}

pub fn load_element(path: &Path, system: &DynSystem) -> Result<CPElement, CliError> {
    load_element_file(path)?.to_element(system)
}
