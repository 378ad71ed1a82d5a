//! Versioned, seeded test functions used by the empirical-constant checks.
//!
//! Every entry is defined in the scaled variable `y = x/W` of the box `[−W, W)^n`, so a
//! refined grid over the same box samples the same function. Hashes are SHA-256 digests of the
//! little-endian samples on the reference grid (`n = 2`, `W = 1`, 32 points per axis) and are
//! frozen per corpus version.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{sample, GridSpec, SampledFunction};
use crate::quad::cell_integral_power;
use crate::sharpness::build_cantor;

pub const CORPUS_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Shape {
    /// `χ{|y|_∞ < r}`.
    Cube { r: f64 },
    /// `χ{|y − c| < r}` with the centre on the diagonal.
    Ball { centre: f64, r: f64 },
    /// `χ{r0 < |y| < r1}`.
    Shell { r0: f64, r1: f64 },
    /// `amp·exp(−|y − c|²/s)` summed over the listed bumps.
    Gaussian { bumps: [(f64, f64, f64); 2] },
    /// `|y|^{−n/λ}`, the origin cell replaced by its cell average.
    PowerTail { lambda: f64 },
    /// Seeded sum of `modes` Fourier modes with wave numbers up to `k_max` (in units of `π`).
    BandLimited { modes: usize, k_max: u32 },
    /// `sin(k π y₁)·exp(−|y|²/s)`.
    Oscillation { k: f64, s: f64 },
    /// Indicator of `E_N` for the nested random cube family, scaled into the box.
    Cantor { delta: f64, depth: usize },
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub seed: u64,
    pub shape: Shape,
}

const ENTRIES: &[CorpusEntry] = &[
    CorpusEntry {
        name: "indicator-cube",
        seed: 0,
        shape: Shape::Cube { r: 0.5 },
    },
    CorpusEntry {
        name: "indicator-ball",
        seed: 0,
        shape: Shape::Ball {
            centre: 0.0,
            r: 0.5,
        },
    },
    CorpusEntry {
        name: "indicator-ball-offset",
        seed: 0,
        shape: Shape::Ball {
            centre: 0.3,
            r: 0.25,
        },
    },
    CorpusEntry {
        name: "indicator-shell",
        seed: 0,
        shape: Shape::Shell { r0: 0.25, r1: 0.5 },
    },
    CorpusEntry {
        name: "gaussian-wide",
        seed: 0,
        shape: Shape::Gaussian {
            bumps: [(1.0, 0.0, 0.25), (0.0, 0.0, 1.0)],
        },
    },
    CorpusEntry {
        name: "gaussian-narrow",
        seed: 0,
        shape: Shape::Gaussian {
            bumps: [(1.0, 0.0, 0.01), (0.0, 0.0, 1.0)],
        },
    },
    CorpusEntry {
        name: "gaussian-dipole",
        seed: 0,
        shape: Shape::Gaussian {
            bumps: [(1.0, -0.3, 0.02), (-0.7, 0.3, 0.04)],
        },
    },
    CorpusEntry {
        name: "power-tail-λ2",
        seed: 0,
        shape: Shape::PowerTail { lambda: 2.0 },
    },
    CorpusEntry {
        name: "power-tail-λ4",
        seed: 0,
        shape: Shape::PowerTail { lambda: 4.0 },
    },
    CorpusEntry {
        name: "power-tail-λ8",
        seed: 0,
        shape: Shape::PowerTail { lambda: 8.0 },
    },
    CorpusEntry {
        name: "band-limited-a",
        seed: 17,
        shape: Shape::BandLimited { modes: 6, k_max: 4 },
    },
    CorpusEntry {
        name: "band-limited-b",
        seed: 29,
        shape: Shape::BandLimited {
            modes: 12,
            k_max: 8,
        },
    },
    CorpusEntry {
        name: "oscillation",
        seed: 0,
        shape: Shape::Oscillation { k: 4.0, s: 0.2 },
    },
    CorpusEntry {
        name: "cantor-half",
        seed: 5,
        shape: Shape::Cantor {
            delta: 0.5,
            depth: 2,
        },
    },
    CorpusEntry {
        name: "cantor-three-quarters",
        seed: 7,
        shape: Shape::Cantor {
            delta: 0.75,
            depth: 1,
        },
    },
];

/// Digests on the reference grid for [`CORPUS_VERSION`].
const FROZEN: &[(&str, &str)] = &[
    (
        "indicator-cube",
        "60c6521f13d3a15509e7be7fbbc64b63e4fa5dcad3efda2237a9c4d1bbbc4394",
    ),
    (
        "indicator-ball",
        "a8c78789bf0c05ec12ef797aeaf6eedbef4e37af0755072402b078048bc212e8",
    ),
    (
        "indicator-ball-offset",
        "fb2c80cddcf59762883e248f23a64831ae08f539a0eed30f3a75a93dd3ece398",
    ),
    (
        "indicator-shell",
        "4a9b6139cc51eed0eb99afff245144129457cbbe8c2b18722874a129557ffa3e",
    ),
    (
        "gaussian-wide",
        "2cd3a2472826d44a54ec67f943ced18783d74fc48012e0248b278c73b621f0c4",
    ),
    (
        "gaussian-narrow",
        "7f868166691ba789a9f5bf111318a7d09103ea173e6d497e1e93183c5edb8dc2",
    ),
    (
        "gaussian-dipole",
        "ef43c8df75ed9bdb008392786f108b527017db222c289bc113bbd53f8a939719",
    ),
    (
        "power-tail-λ2",
        "0664ab562b4dbe6a91ce5e434c993c2a111eee59114ad6d0aa4d313822286ab0",
    ),
    (
        "power-tail-λ4",
        "412c77fb36784ca74aa55fd2416a3abf22419701123d786306c71afc6ccb1b32",
    ),
    (
        "power-tail-λ8",
        "233b32f8ef7b8a69752c75c285277c657d8c84ce2e0eb101509a972a3a3d594e",
    ),
    (
        "band-limited-a",
        "cf1f29b18c1223c7c121809dbb4fcac6f93dc0a13cf15b6d0338cd002a1fa30b",
    ),
    (
        "band-limited-b",
        "d815556c99f59b45170bd0dd7737a24ac9c4478dfad62ba69f2067cc82d26f1d",
    ),
    (
        "oscillation",
        "a87951b34eea0dd6701c2b1896e57c9f70e6a2f4e9e501b37512c70fb313a215",
    ),
    (
        "cantor-half",
        "c8d7e0d44f5f71e9692e6e81fc3cf75936d88b527321bd3f049a4c5364fe7c49",
    ),
    (
        "cantor-three-quarters",
        "bf5db3d5fe7dfd370cdc599770562aff8738c351118768ba7847bdb229f43d86",
    ),
];

pub fn entries() -> &'static [CorpusEntry] {
    ENTRIES
}

pub fn entry(name: &str) -> Result<&'static CorpusEntry> {
    let canonical = name.replace("lambda", "λ");
    ENTRIES
        .iter()
        .find(|e| e.name == canonical)
        .ok_or_else(|| Error::Corpus(format!("no corpus entry named {name:?}")))
}

pub fn reference_grid() -> GridSpec {
    GridSpec::new(2, 1.0, 32, false).expect("reference grid")
}

impl CorpusEntry {
    /// Whether the entry can be sampled in dimension `dim`.
    pub fn supports(&self, dim: usize) -> bool {
        !matches!(self.shape, Shape::Cantor { .. }) || dim <= 2
    }

    pub fn sample(&self, grid: &GridSpec) -> Result<SampledFunction> {
        let w = grid.half_width();
        let n = grid.dim() as f64;
        let scaled = |x: &[f64], out: &mut [f64; 3]| {
            for (o, v) in out.iter_mut().zip(x) {
                *o = v / w;
            }
        };
        let radius = |y: &[f64]| y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dim = grid.dim();
        match self.shape {
            Shape::Cube { r } => sample(grid, |x| {
                f64::from(u8::from(x.iter().all(|v| (v / w).abs() < r)))
            }),
            Shape::Ball { centre, r } => sample(grid, |x| {
                let d: f64 = x.iter().map(|v| (v / w - centre).powi(2)).sum();
                f64::from(u8::from(d.sqrt() < r))
            }),
            Shape::Shell { r0, r1 } => sample(grid, |x| {
                let mut y = [0.0; 3];
                scaled(x, &mut y);
                let rho = radius(&y[..dim]);
                f64::from(u8::from(rho > r0 && rho < r1))
            }),
            Shape::Gaussian { bumps } => sample(grid, |x| {
                bumps
                    .iter()
                    .map(|&(amp, c, s)| {
                        let d: f64 = x.iter().map(|v| (v / w - c).powi(2)).sum();
                        amp * (-d / s).exp()
                    })
                    .sum()
            }),
            Shape::PowerTail { lambda } => {
                let h = grid.spacing();
                let exponent = n / lambda;
                // Cell average of |x/W|^{−n/λ} over the cell centred at the origin.
                let origin = w.powf(exponent)
                    * cell_integral_power(&vec![0.0; dim], h, n - exponent)
                    / h.powi(dim as i32);
                sample(grid, |x| {
                    let r = radius(x);
                    if r < 0.5 * h {
                        origin
                    } else {
                        (r / w).powf(-exponent)
                    }
                })
            }
            Shape::BandLimited { modes, k_max } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let terms: Vec<(Vec<f64>, f64, f64)> = (0..modes)
                    .map(|_| {
                        let k: Vec<f64> = (0..dim)
                            .map(|_| f64::from(rng.random_range(0..=k_max)))
                            .collect();
                        (
                            k,
                            rng.random_range(-1.0..1.0),
                            rng.random_range(0.0..std::f64::consts::TAU),
                        )
                    })
                    .collect();
                sample(grid, |x| {
                    terms
                        .iter()
                        .map(|(k, amp, phase)| {
                            let arg: f64 = k
                                .iter()
                                .zip(x)
                                .map(|(k, v)| k * std::f64::consts::PI * v / w)
                                .sum();
                            amp * (arg + phase).cos()
                        })
                        .sum()
                })
            }
            Shape::Oscillation { k, s } => sample(grid, |x| {
                let mut y = [0.0; 3];
                scaled(x, &mut y);
                let r = radius(&y[..dim]);
                (k * std::f64::consts::PI * y[0]).sin() * (-r * r / s).exp()
            }),
            Shape::Cantor { delta, depth } => {
                if dim > 2 {
                    return Err(Error::Corpus(format!(
                        "{} needs a grid of dimension at most 2",
                        self.name
                    )));
                }
                let family = build_cantor(dim, depth, delta, self.seed)?;
                let scale = family.side() / (2.0 * w);
                let cubes = &family.stages[depth];
                let half = 0.5 * grid.spacing();
                // Cell-centre test: node k owns [x_k, x_k + h).
                sample(grid, |x| {
                    let y: Vec<f64> = x.iter().map(|v| (v + half + w) * scale).collect();
                    f64::from(u8::from(cubes.iter().any(|q| q.contains_point(&y))))
                })
            }
        }
    }

    /// SHA-256 of the samples on [`reference_grid`], as lowercase hex.
    pub fn hash(&self) -> Result<String> {
        let f = self.sample(&reference_grid())?;
        let mut hasher = Sha256::new();
        for v in f.values() {
            hasher.update(v.to_le_bytes());
        }
        Ok(hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect())
    }
}

pub fn load(name: &str, grid: &GridSpec) -> Result<SampledFunction> {
    entry(name)?.sample(grid)
}

/// All entries that can be sampled on `grid`, in listing order.
pub fn load_all(grid: &GridSpec) -> Result<Vec<(&'static str, SampledFunction)>> {
    ENTRIES
        .iter()
        .filter(|e| e.supports(grid.dim()))
        .map(|e| Ok((e.name, e.sample(grid)?)))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Listing {
    pub version: u32,
    pub name: &'static str,
    pub seed: u64,
    pub shape: Shape,
    pub hash: String,
}

pub fn listing() -> Result<Vec<Listing>> {
    ENTRIES
        .iter()
        .map(|e| {
            Ok(Listing {
                version: CORPUS_VERSION,
                name: e.name,
                seed: e.seed,
                shape: e.shape,
                hash: e.hash()?,
            })
        })
        .collect()
}

/// Checks the computed digests against the frozen table of `version`.
pub fn verify_frozen(version: u32) -> Result<()> {
    if version != CORPUS_VERSION {
        return Err(Error::Corpus(format!(
            "corpus version {version} requested, this build provides version {CORPUS_VERSION}"
        )));
    }
    check_against(FROZEN)
}

fn check_against(frozen: &[(&str, &str)]) -> Result<()> {
    if frozen.len() != ENTRIES.len() {
        return Err(Error::Corpus(format!(
            "frozen table lists {} entries, corpus has {}",
            frozen.len(),
            ENTRIES.len()
        )));
    }
    for (e, (name, digest)) in ENTRIES.iter().zip(frozen) {
        let actual = e.hash()?;
        if e.name != *name || actual != *digest {
            return Err(Error::Corpus(format!(
                "entry {} hashes to {actual}, frozen as {name} {digest}; bump the corpus version",
                e.name
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listing_is_stable_and_frozen() {
        let a = listing().unwrap();
        let b = listing().unwrap();
        assert!(a.len() >= 12);
        assert_eq!(
            a.iter().map(|l| &l.hash).collect::<Vec<_>>(),
            b.iter().map(|l| &l.hash).collect::<Vec<_>>()
        );
        verify_frozen(CORPUS_VERSION).unwrap();
        assert!(verify_frozen(CORPUS_VERSION + 1).is_err());
    }

    #[test]
    fn tampered_digest_is_detected() {
        let mut table: Vec<(&str, &str)> = FROZEN.to_vec();
        table[0].1 = "00";
        assert!(check_against(&table).is_err());
    }

    #[test]
    fn power_tail_parameters() {
        let g = GridSpec::new(1, 1.0, 64, false).unwrap();
        let f = load("power-tail-lambda4", &g).unwrap();
        let k = g.node_index(&[0.5]).unwrap();
        assert!((f.values()[k] - 0.5f64.powf(-0.25)).abs() < 1e-12);
        let origin = g.node_index(&[0.0]).unwrap();
        // 1-D cell average of |x|^{-1/4} over [−h/2, h/2] is (h/2)^{−1/4}·4/3.
        let h = g.spacing();
        assert!((f.values()[origin] - (0.5 * h).powf(-0.25) * 4.0 / 3.0).abs() < 1e-12);
        assert!(load("missing", &g).is_err());
    }

    #[test]
    fn entries_sample_in_supported_dimensions() {
        for dim in 1..=3 {
            let g = GridSpec::new(dim, 1.0, 16, false).unwrap();
            for e in entries().iter().filter(|e| e.supports(dim)) {
                let f = e.sample(&g).unwrap();
                assert!(f.max_abs() > 0.0, "{} vanishes in dimension {dim}", e.name);
            }
        }
    }
}
