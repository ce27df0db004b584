//! Sign polynomials and the (s, τ) stability classifier at space forms.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CurvError, Result};
use crate::variation::ModeKind;

/// Linear forms closer to zero than this count as equalities.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Conformal second-variation polynomial for `λ = 1`, in the eigenvalue `μ` of `−Δ`.
pub fn p1(n: usize, s: f64, tau: f64, mu: f64) -> f64 {
    let n = n as f64;
    (n - 1.0) * (mu - n) * (lead(n, s, tau) * mu + (n - 4.0) * quad(n, s, tau))
}

/// Conformal second-variation polynomial for `λ = −1`.
pub fn p2(n: usize, s: f64, tau: f64, mu: f64) -> f64 {
    let n = n as f64;
    (n - 1.0) * (mu + n) * (lead(n, s, tau) * mu - (n - 4.0) * quad(n, s, tau))
}

fn lead(n: f64, s: f64, tau: f64) -> f64 {
    (n * s - 4.0 * tau + 4.0 * n * tau + 4.0) / 2.0
}

fn quad(n: f64, s: f64, tau: f64) -> f64 {
    n * n * tau + n * s - n * tau - s + 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityQuery {
    pub n: usize,
    pub lambda: i32,
    pub mode: ModeKind,
    pub s: f64,
    pub tau: f64,
}

impl StabilityQuery {
    pub fn new(n: usize, lambda: i32, mode: ModeKind, s: f64, tau: f64) -> Result<Self> {
        if n < 3 {
            return Err(CurvError::UnsupportedDimension(n));
        }
        if !matches!(lambda, -1..=1) {
            return Err(CurvError::Config(format!(
                "lambda must be -1, 0 or 1, got {lambda}"
            )));
        }
        if !s.is_finite() || !tau.is_finite() {
            return Err(CurvError::Config(format!(
                "s and tau must be finite, got ({s}, {tau})"
            )));
        }
        Ok(StabilityQuery {
            n,
            lambda,
            mode,
            s,
            tau,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    LocalMin,
    LocalMax,
    Boundary,
    Undetermined,
}

impl VerdictKind {
    pub fn name(self) -> &'static str {
        match self {
            VerdictKind::LocalMin => "LocalMin",
            VerdictKind::LocalMax => "LocalMax",
            VerdictKind::Boundary => "Boundary",
            VerdictKind::Undetermined => "Undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub value: VerdictKind,
    pub citation: Option<String>,
}

/// `a·s + b·τ + c > 0`.
#[derive(Debug, Clone, Copy)]
struct Ineq {
    a: f64,
    b: f64,
    c: f64,
}

impl Ineq {
    fn eval(&self, s: f64, tau: f64) -> f64 {
        self.a * s + self.b * tau + self.c
    }

    fn neg(self) -> Ineq {
        Ineq {
            a: -self.a,
            b: -self.b,
            c: -self.c,
        }
    }
}

/// `s > slope·τ + icpt`.
fn s_above(slope: f64, icpt: f64) -> Ineq {
    Ineq {
        a: 1.0,
        b: -slope,
        c: -icpt,
    }
}

fn s_below(slope: f64, icpt: f64) -> Ineq {
    s_above(slope, icpt).neg()
}

fn tau_above(t: f64) -> Ineq {
    Ineq {
        a: 0.0,
        b: 1.0,
        c: -t,
    }
}

fn tau_below(t: f64) -> Ineq {
    tau_above(t).neg()
}

struct Clause {
    verdict: VerdictKind,
    citation: String,
    ineqs: Vec<Ineq>,
}

fn clause(verdict: VerdictKind, citation: &str, ineqs: Vec<Ineq>) -> Clause {
    Clause {
        verdict,
        citation: citation.to_string(),
        ineqs,
    }
}

use VerdictKind::{LocalMax, LocalMin};

fn clauses(q: &StabilityQuery) -> Vec<Clause> {
    let nf = q.n as f64;
    let tt_tau = (6.0 * nf - 12.0) / (nf * (nf - 1.0));
    let sigma = 2.0 / ((nf - 1.0) * (nf - 2.0));
    // s > −4(n−1)/n·τ − 4/n and s > −2n(n−1)/(3n−4)·τ − 8/(3n−4)
    let line_a = (-4.0 * (nf - 1.0) / nf, -4.0 / nf);
    let line_b = (
        -2.0 * nf * (nf - 1.0) / (3.0 * nf - 4.0),
        -8.0 / (3.0 * nf - 4.0),
    );
    match (q.mode, q.lambda) {
        (ModeKind::Tt, 1) => vec![
            clause(
                LocalMin,
                "Thm 1.1(1)",
                vec![s_above(0.0, -4.0), tau_below(tt_tau)],
            ),
            clause(
                LocalMax,
                "Thm 1.1(2)",
                vec![s_below(0.0, -4.0), tau_above(tt_tau)],
            ),
        ],
        (ModeKind::Tt, -1) => vec![
            clause(
                LocalMin,
                "Thm 1.2(1)",
                vec![s_above(0.0, -4.0), tau_above(tt_tau)],
            ),
            clause(
                LocalMax,
                "Thm 1.2(2)",
                vec![s_below(0.0, -4.0), tau_below(tt_tau)],
            ),
        ],
        (ModeKind::Tt, _) => vec![
            clause(LocalMin, "Thm 1.3", vec![s_above(0.0, -4.0)]),
            clause(LocalMax, "Thm 1.3", vec![s_below(0.0, -4.0)]),
        ],
        (ModeKind::Conformal, 0) => {
            // s + 4τ − 4(τ − 1)/n > 0
            let f = Ineq {
                a: 1.0,
                b: 4.0 - 4.0 / nf,
                c: 4.0 / nf,
            };
            vec![
                clause(LocalMin, "Thm 1.4", vec![f]),
                clause(LocalMax, "Thm 1.4", vec![f.neg()]),
            ]
        }
        (ModeKind::Conformal, lambda) => {
            let stmt = if lambda == 1 { "Thm 1.5" } else { "Thm 1.6" };
            match q.n {
                4 => {
                    let cite = format!("{stmt}(1)");
                    vec![
                        clause(LocalMin, &cite, vec![s_above(-3.0, -1.0)]),
                        clause(LocalMax, &cite, vec![s_below(-3.0, -1.0)]),
                    ]
                }
                3 if lambda == 1 => {
                    let (l83, l125) = ((-8.0 / 3.0, -4.0 / 3.0), (-12.0 / 5.0, -8.0 / 5.0));
                    vec![
                        clause(
                            LocalMin,
                            "Thm 1.5(2)",
                            vec![tau_below(1.0), s_above(l83.0, l83.1)],
                        ),
                        clause(
                            LocalMin,
                            "Thm 1.5(2)",
                            vec![tau_above(1.0), s_above(l125.0, l125.1)],
                        ),
                        clause(
                            LocalMax,
                            "Thm 1.5(2)",
                            vec![tau_below(1.0), s_below(l125.0, l125.1)],
                        ),
                        clause(
                            LocalMax,
                            "Thm 1.5(2)",
                            vec![tau_above(1.0), s_below(l83.0, l83.1)],
                        ),
                    ]
                }
                3 => {
                    // P2 = 2(μ+3)(aμ + Q) with a ∝ 3s + 8τ + 4, Q = 2(s + 3τ + 1); the stated
                    // regions and those in the proof of Thm 1.6 both disagree with its sign.
                    let cite = "P2 sign, n=3 (Thm 1.6(2) states other regions)";
                    let (l83, l3) = ((-8.0 / 3.0, -4.0 / 3.0), (-3.0, -1.0));
                    vec![
                        clause(LocalMin, cite, vec![tau_above(1.0), s_above(l83.0, l83.1)]),
                        clause(LocalMin, cite, vec![tau_below(1.0), s_above(l3.0, l3.1)]),
                        clause(LocalMax, cite, vec![tau_above(1.0), s_below(l3.0, l3.1)]),
                        clause(LocalMax, cite, vec![tau_below(1.0), s_below(l83.0, l83.1)]),
                    ]
                }
                _ if lambda == 1 => vec![
                    clause(
                        LocalMin,
                        "Thm 1.5(3)",
                        vec![tau_above(sigma), s_above(line_a.0, line_a.1)],
                    ),
                    clause(
                        LocalMin,
                        "Thm 1.5(3)",
                        vec![tau_below(sigma), s_above(line_b.0, line_b.1)],
                    ),
                    clause(
                        LocalMax,
                        "Thm 1.5(3)",
                        vec![tau_above(sigma), s_below(line_b.0, line_b.1)],
                    ),
                    clause(
                        LocalMax,
                        "Thm 1.5(3)",
                        vec![tau_below(sigma), s_below(line_a.0, line_a.1)],
                    ),
                ],
                _ => {
                    // s < −nτ − 2/(n−1)
                    let line_c = (-nf, -2.0 / (nf - 1.0));
                    vec![
                        clause(
                            LocalMin,
                            "Thm 1.6(3)",
                            vec![
                                tau_below(sigma),
                                s_above(line_a.0, line_a.1),
                                s_below(line_c.0, line_c.1),
                            ],
                        ),
                        // the stated maximizer regions let aμ dominate P2 with a > 0
                        clause(
                            LocalMax,
                            "P2 sign (Thm 1.6(3) states other regions)",
                            vec![
                                tau_above(sigma),
                                s_below(line_a.0, line_a.1),
                                s_above(line_c.0, line_c.1),
                            ],
                        ),
                    ]
                }
            }
        }
    }
}

/// A clause that holds strictly gives its verdict; one that holds up to
/// equality on some defining form gives `Boundary`.
pub fn classify(q: &StabilityQuery) -> Verdict {
    let mut touched: Option<String> = None;
    for c in clauses(q) {
        let vals: Vec<f64> = c.ineqs.iter().map(|f| f.eval(q.s, q.tau)).collect();
        if vals.iter().all(|&v| v > BOUNDARY_TOL) {
            return Verdict {
                value: c.verdict,
                citation: Some(c.citation),
            };
        }
        if touched.is_none() && vals.iter().all(|&v| v >= -BOUNDARY_TOL) {
            touched = Some(c.citation);
        }
    }
    match touched {
        Some(citation) => Verdict {
            value: VerdictKind::Boundary,
            citation: Some(citation),
        },
        None => Verdict {
            value: VerdictKind::Undetermined,
            citation: None,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtlasRequest {
    pub n: usize,
    pub lambda: i32,
    pub mode: ModeKind,
    pub s_range: (f64, f64),
    pub tau_range: (f64, f64),
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasRow {
    pub n: usize,
    pub lambda: i32,
    pub mode: ModeKind,
    pub s: f64,
    pub tau: f64,
    pub verdict: VerdictKind,
    pub citation: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

fn lerp((a, b): (f64, f64), i: usize, m: usize) -> f64 {
    if i + 1 == m {
        b
    } else {
        a + (b - a) * i as f64 / (m - 1) as f64
    }
}

/// Rows ordered with `τ` outer and `s` inner.
pub fn atlas_rows(req: &AtlasRequest) -> Result<Vec<AtlasRow>> {
    let (s0, s1) = req.s_range;
    let (t0, t1) = req.tau_range;
    if ![s0, s1, t0, t1].iter().all(|x| x.is_finite()) {
        return Err(CurvError::Config("atlas ranges must be finite".into()));
    }
    if req.resolution < 2 {
        return Err(CurvError::Config(format!(
            "atlas resolution must be at least 2, got {}",
            req.resolution
        )));
    }
    StabilityQuery::new(req.n, req.lambda, req.mode, s0, t0)?;
    let m = req.resolution;
    Ok((0..m * m)
        .into_par_iter()
        .map(|idx| {
            let tau = lerp(req.tau_range, idx / m, m);
            let s = lerp(req.s_range, idx % m, m);
            let q = StabilityQuery {
                n: req.n,
                lambda: req.lambda,
                mode: req.mode,
                s,
                tau,
            };
            let v = classify(&q);
            AtlasRow {
                n: req.n,
                lambda: req.lambda,
                mode: req.mode,
                s,
                tau,
                verdict: v.value,
                citation: v.citation,
            }
        })
        .collect())
}

pub fn write_atlas<W: Write>(rows: &[AtlasRow], format: OutputFormat, mut out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Writes the atlas to `path` and returns the row count.
pub fn emit_atlas(req: &AtlasRequest, format: OutputFormat, path: &Path) -> Result<usize> {
    let rows = atlas_rows(req)?;
    let file = File::create(path)?;
    write_atlas(&rows, format, std::io::BufWriter::new(file))?;
    Ok(rows.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::Coefficients;
    use crate::variation::{second_variation_conformal_predicted, second_variation_tt_predicted};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(n: usize, lambda: i32, mode: ModeKind, s: f64, tau: f64) -> Verdict {
        classify(&StabilityQuery::new(n, lambda, mode, s, tau).unwrap())
    }

    #[test]
    fn polynomial_examples() {
        assert_eq!(p1(4, 0.0, 0.0, 4.0), 0.0);
        assert_eq!(p1(3, 0.0, 0.0, 6.0), 60.0);
        assert_eq!(p2(3, 0.0, 0.0, 3.0), 96.0);
        assert_eq!(p2(5, 0.3, -0.7, -5.0), 0.0);
        for mu in [0.5, 3.0, 17.0] {
            assert_eq!(p2(4, -1.0, 0.0, mu), 0.0);
        }
    }

    #[test]
    fn n4_factorization() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let (s, tau, mu) = (
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
                rng.random_range(0.0..50.0),
            );
            let want = 6.0 * (mu - 4.0) * (s + 3.0 * tau + 1.0) * mu;
            let got = p1(4, s, tau, mu);
            assert!(
                (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                "{got} {want}"
            );
        }
    }

    #[test]
    fn worked_examples() {
        let v = q(4, 1, ModeKind::Tt, 0.0, 0.0);
        assert_eq!(v.value, LocalMin);
        assert_eq!(v.citation.as_deref(), Some("Thm 1.1(1)"));
        let v = q(4, 1, ModeKind::Conformal, -1.0, 0.0);
        assert_eq!(v.value, VerdictKind::Boundary);
        let v = q(5, 1, ModeKind::Conformal, 0.0, 1.0);
        assert_eq!(v.value, LocalMin);
        assert_eq!(v.citation.as_deref(), Some("Thm 1.5(3)"));
        let v = q(4, 1, ModeKind::Conformal, 0.0, 0.0);
        assert_eq!(
            (v.value, v.citation.as_deref()),
            (LocalMin, Some("Thm 1.5(1)"))
        );

        assert_eq!(q(3, 0, ModeKind::Tt, -3.5, 7.0).value, LocalMin);
        assert_eq!(q(3, 0, ModeKind::Tt, -4.5, 7.0).value, LocalMax);
        assert_eq!(
            q(3, 0, ModeKind::Tt, -4.0, 7.0).value,
            VerdictKind::Boundary
        );
        // s + 4τ = 4(τ − 1)/n at n = 3, τ = 1 means s = −4
        assert_eq!(
            q(3, 0, ModeKind::Conformal, -4.0, 1.0).value,
            VerdictKind::Boundary
        );
        assert_eq!(q(3, 0, ModeKind::Conformal, -3.9, 1.0).value, LocalMin);

        let u = q(3, 1, ModeKind::Tt, 0.0, 2.0);
        assert_eq!((u.value, u.citation), (VerdictKind::Undetermined, None));
        assert_eq!(q(3, 1, ModeKind::Tt, -5.0, 2.0).value, LocalMax);
        assert_eq!(q(6, -1, ModeKind::Tt, 0.0, 2.0).value, LocalMin);
        assert_eq!(q(6, -1, ModeKind::Tt, -5.0, 0.0).value, LocalMax);
    }

    #[test]
    fn hyperbolic_conformal_regions() {
        let v = q(3, -1, ModeKind::Conformal, 0.0, 0.0);
        assert_eq!(v.value, LocalMin);
        assert!(v.citation.unwrap().contains("P2"));
        assert_eq!(q(3, -1, ModeKind::Conformal, -1.5, 0.0).value, LocalMax);
        assert_eq!(q(3, -1, ModeKind::Conformal, -11.0, 3.0).value, LocalMax);
        assert_eq!(
            q(3, -1, ModeKind::Conformal, -9.6, 3.0).value,
            VerdictKind::Undetermined
        );
        assert_eq!(q(4, -1, ModeKind::Conformal, 0.0, 0.0).value, LocalMin);
        assert_eq!(q(4, -1, ModeKind::Conformal, -2.0, 0.0).value, LocalMax);
        // n = 5: τ < 1/6 and −(16/5)τ − 4/5 < s < −5τ − 1/2
        assert_eq!(q(5, -1, ModeKind::Conformal, -0.6, 0.0).value, LocalMin);
        assert_eq!(
            q(5, -1, ModeKind::Conformal, 0.0, 0.0).value,
            VerdictKind::Undetermined
        );
        assert_eq!(
            q(5, -1, ModeKind::Conformal, -2.0, 0.0).value,
            VerdictKind::Undetermined
        );
        // τ = 1: −5.5 < s < −4
        assert_eq!(q(5, -1, ModeKind::Conformal, -5.0, 1.0).value, LocalMax);
    }

    #[test]
    fn query_validation() {
        assert!(StabilityQuery::new(2, 1, ModeKind::Tt, 0.0, 0.0).is_err());
        assert!(StabilityQuery::new(4, 2, ModeKind::Tt, 0.0, 0.0).is_err());
        assert!(StabilityQuery::new(4, 1, ModeKind::Tt, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn verdicts_agree_with_sampled_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 3..=7 {
            let nf = n as f64;
            for _ in 0..400 {
                let (s, tau) = (rng.random_range(-12.0..6.0), rng.random_range(-4.0..4.0));
                let coeff = Coefficients { s, tau };
                let tt = q(n, 1, ModeKind::Tt, s, tau).value;
                let conf = q(n, 1, ModeKind::Conformal, s, tau).value;
                let hyp = q(n, -1, ModeKind::Conformal, s, tau).value;
                for k in 0..=60 {
                    let ll = 4.0 * nf * (1.0 + 9.0 * k as f64 / 60.0);
                    let d2 = second_variation_tt_predicted(n, 1.0, ll, coeff, 1.0).unwrap();
                    match tt {
                        LocalMin => assert!(d2 >= 0.0, "n={n} s={s} τ={tau} λ_L={ll}: {d2}"),
                        LocalMax => assert!(d2 <= 0.0, "n={n} s={s} τ={tau} λ_L={ll}: {d2}"),
                        _ => {}
                    }
                    let mu = nf * (1.0 + 9.0 * k as f64 / 60.0);
                    let p = p1(n, s, tau, mu);
                    match conf {
                        LocalMin => assert!(p >= 0.0, "P1 n={n} s={s} τ={tau} μ={mu}: {p}"),
                        LocalMax => assert!(p <= 0.0, "P1 n={n} s={s} τ={tau} μ={mu}: {p}"),
                        _ => {}
                    }
                    let d2c = second_variation_conformal_predicted(n, 1.0, mu, coeff, 1.0).unwrap();
                    assert!((d2c - p).abs() <= 1e-9 * p.abs().max(1.0));
                    let mu = 1e-3 + 10.0 * nf * k as f64 / 60.0;
                    let p = p2(n, s, tau, mu);
                    match hyp {
                        LocalMin => assert!(p >= 0.0, "P2 n={n} s={s} τ={tau} μ={mu}: {p}"),
                        LocalMax => assert!(p <= 0.0, "P2 n={n} s={s} τ={tau} μ={mu}: {p}"),
                        _ => {}
                    }
                    let d2h =
                        second_variation_conformal_predicted(n, -1.0, mu, coeff, 1.0).unwrap();
                    assert!((d2h - p).abs() <= 1e-9 * p.abs().max(1.0), "{d2h} {p}");
                    let ll = -nf + 10.0 * nf * k as f64 / 60.0;
                    let d2 = second_variation_tt_predicted(n, -1.0, ll, coeff, 1.0).unwrap();
                    match q(n, -1, ModeKind::Tt, s, tau).value {
                        LocalMin => assert!(d2 >= 0.0, "TT λ=-1 n={n} s={s} τ={tau}: {d2}"),
                        LocalMax => assert!(d2 <= 0.0, "TT λ=-1 n={n} s={s} τ={tau}: {d2}"),
                        _ => {}
                    }
                    let d2 = second_variation_tt_predicted(n, 0.0, ll + nf, coeff, 1.0).unwrap();
                    match q(n, 0, ModeKind::Tt, s, tau).value {
                        LocalMin => assert!(d2 >= 0.0),
                        LocalMax => assert!(d2 <= 0.0),
                        _ => {}
                    }
                    let d2 = second_variation_conformal_predicted(n, 0.0, mu, coeff, 1.0).unwrap();
                    match q(n, 0, ModeKind::Conformal, s, tau).value {
                        LocalMin => assert!(d2 >= 0.0),
                        LocalMax => assert!(d2 <= 0.0),
                        _ => {}
                    }
                }
            }
        }
    }

    #[test]
    fn atlas_grid() {
        let req = AtlasRequest {
            n: 4,
            lambda: 1,
            mode: ModeKind::Conformal,
            s_range: (-4.0, 2.0),
            tau_range: (-2.0, 2.0),
            resolution: 50,
        };
        let rows = atlas_rows(&req).unwrap();
        assert_eq!(rows.len(), 2500);
        assert_eq!((rows[1].s, rows[1].tau), (-4.0 + 6.0 / 49.0, -2.0));
        assert_eq!(rows[2499].s, 2.0);
        for r in &rows {
            let f = r.s + 3.0 * r.tau + 1.0;
            let want = if f > BOUNDARY_TOL {
                LocalMin
            } else if f < -BOUNDARY_TOL {
                LocalMax
            } else {
                VerdictKind::Boundary
            };
            assert_eq!(r.verdict, want, "{r:?}");
        }
        assert_eq!(rows, atlas_rows(&req).unwrap());

        let tt = AtlasRequest {
            n: 3,
            lambda: 1,
            mode: ModeKind::Tt,
            s_range: (-8.0, 0.0),
            tau_range: (0.0, 2.0),
            resolution: 9,
        };
        let rows = atlas_rows(&tt).unwrap();
        let count = |k| rows.iter().filter(|r| r.verdict == k).count();
        assert!(count(LocalMin) > 0 && count(LocalMax) > 0 && count(VerdictKind::Boundary) > 0);
        for r in &rows {
            if r.verdict == LocalMin {
                assert!(r.s > -4.0 && r.tau < 1.0);
            }
            if r.verdict == LocalMax {
                assert!(r.s < -4.0 && r.tau > 1.0);
            }
        }

        let tiny = AtlasRequest {
            resolution: 2,
            ..tt
        };
        let mut buf = Vec::new();
        write_atlas(&atlas_rows(&tiny).unwrap(), OutputFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,lambda,mode,s,tau,verdict,citation");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "3,1,tt,-8.0,0.0,Undetermined,");
        assert_eq!(lines[2], "3,1,tt,0.0,0.0,LocalMin,Thm 1.1(1)");
        assert_eq!(lines[3], "3,1,tt,-8.0,2.0,LocalMax,Thm 1.1(2)");
        assert!(atlas_rows(&AtlasRequest {
            resolution: 1,
            ..tt
        })
        .is_err());
        assert!(atlas_rows(&AtlasRequest {
            s_range: (0.0, f64::INFINITY),
            ..tt
        })
        .is_err());
    }
}
