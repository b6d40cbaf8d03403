use std::io::Write;

use bl_core::mixing::{cutoff_scan, expected_bound_check, mixing_bound, tv_curve, BoundKind};
use bl_core::oracle::simulate;
use bl_core::spectral::{b_coefficients, c_hypergeometric, pascal_eigenvector};
use bl_core::symmetry::PowerBackend;
use bl_core::verify::run_suite;
use bl_core::{
    canonicalize, spectrum, stationary_distribution, ModelParams, Rational, Scalar,
    SpectralExpansion, StateMap,
};
use serde_json::json;

use crate::output::{Cell, Data, Document, IntoCell};
use crate::{backend_name, params_json, BackendChoice, Cli, Command, EigvecForm, Failure};

struct Model {
    original: (u32, u32, u32),
    params: ModelParams,
    map: StateMap,
}

impl Model {
    fn from_cli(cli: &Cli, err: &mut dyn Write) -> Result<Self, Failure> {
        let (Some(n1), Some(n2), Some(nw)) = (cli.model.n1, cli.model.n2, cli.model.nw) else {
            return Err(Failure::Usage(
                "--n1, --n2 and --nw are required for this command".into(),
            ));
        };
        let (params, map) = canonicalize(n1, n2, nw)?;
        if !map.is_identity() {
            writeln!(
                err,
                "note: ({n1},{n2},{nw}) is relabelled to the canonical model ({},{},{}); \
                 states are reported in the original labels",
                params.n1(),
                params.n2(),
                params.nw()
            )?;
        }
        Ok(Model {
            original: (n1, n2, nw),
            params,
            map,
        })
    }

    fn json(&self) -> serde_json::Value {
        params_json(self.original, &self.params, &self.map)
    }

    /// Canonical index of an original state label.
    fn state(&self, label: usize, what: &'static str) -> Result<usize, Failure> {
        let range = self.map.original_range();
        if !range.contains(&label) {
            return Err(Failure::Domain(format!(
                "{what} state {label} outside {}..={}",
                range.start(),
                range.end()
            )));
        }
        Ok(self.map.apply(label))
    }

    /// `(original, canonical)` pairs in original order.
    fn labels(&self) -> Vec<(usize, usize)> {
        self.map.pairs()
    }

    /// Rough cost of one exact term after `m` steps, in 64-bit limbs.
    fn limbs(&self, m: u64) -> f64 {
        let bits = (self.params.denominator() as f64).log2() * m as f64;
        (bits / 64.0).max(1.0)
    }
}

/// Chooses the backend for a run with the given exact-cost estimate.
fn resolve(cli: &Cli, cost: f64) -> Result<bool, Failure> {
    match cli.backend {
        BackendChoice::Float => Ok(false),
        BackendChoice::Auto => Ok(cost <= cli.max_exact_cost),
        BackendChoice::Exact if cost <= cli.max_exact_cost => Ok(true),
        BackendChoice::Exact => Err(Failure::Usage(format!(
            "exact cost estimate {cost:.3e} exceeds --max-exact-cost {:.3e}; \
             use --backend float or raise the limit",
            cli.max_exact_cost
        ))),
    }
}

fn value(r: Rational, exact: bool) -> Cell {
    if exact {
        Cell::Exact(r)
    } else {
        Cell::Float(Scalar::to_f64(&r))
    }
}

fn count(v: impl TryInto<i64>) -> Cell {
    Cell::Int(v.try_into().unwrap_or(i64::MAX))
}

fn doc(command: &'static str, exact: bool, params: serde_json::Value, data: Data) -> Document {
    Document {
        command,
        backend: backend_name(exact),
        params,
        data,
    }
}

type Outcome = (Document, Result<(), Failure>);

pub(crate) fn dispatch(cli: &Cli, err: &mut dyn Write) -> Result<Outcome, Failure> {
    if let Command::Verify { max_n } = cli.command {
        return Ok(verify(max_n));
    }
    let model = Model::from_cli(cli, err)?;
    let p = &model.params;
    let s = p.states() as f64;
    let document = match &cli.command {
        Command::Spectrum => {
            let exact = resolve(cli, 0.0)?;
            let rows = spectrum(p)
                .values
                .into_iter()
                .enumerate()
                .map(|(k, l)| vec![count(k), value(l, exact)])
                .collect();
            doc(
                "spectrum",
                exact,
                model.json(),
                Data::Table {
                    columns: vec!["k", "lambda"],
                    rows,
                },
            )
        }
        Command::Eigvec { k, form } => {
            let exact = resolve(cli, 0.0)?;
            p.check_state(*k, "eigen")?;
            let data = match form {
                EigvecForm::B => {
                    let b = b_coefficients(p, *k)?.b;
                    Data::Table {
                        columns: vec!["j", "value"],
                        rows: b
                            .into_iter()
                            .enumerate()
                            .map(|(j, x)| vec![count(j), value(x, exact)])
                            .collect(),
                    }
                }
                EigvecForm::Pascal | EigvecForm::Hypergeometric => {
                    let c = if *form == EigvecForm::Pascal {
                        pascal_eigenvector(&b_coefficients(p, *k)?).c
                    } else {
                        c_hypergeometric(p, *k)?.c
                    };
                    Data::Table {
                        columns: vec!["i", "value"],
                        rows: model
                            .labels()
                            .into_iter()
                            .map(|(i, ci)| vec![count(i), value(c[ci].clone(), exact)])
                            .collect(),
                    }
                }
            };
            let mut params = model.json();
            params["k"] = json!(k);
            doc("eigvec", exact, params, data)
        }
        Command::Stationary => {
            let exact = resolve(cli, 0.0)?;
            let pi = stationary_distribution(p);
            let rows = model
                .labels()
                .into_iter()
                .map(|(i, ci)| vec![count(i), value(pi[ci].clone(), exact)])
                .collect();
            doc(
                "stationary",
                exact,
                model.json(),
                Data::Table {
                    columns: vec!["i", "pi"],
                    rows,
                },
            )
        }
        Command::Power { m } => {
            let exact = resolve(cli, s * s * s * model.limbs(*m))?;
            let exp = SpectralExpansion::new(p);
            let data = if exact {
                power_data::<Rational>(&model, &exp, *m)
            } else {
                power_data::<f64>(&model, &exp, *m)
            };
            let mut params = model.json();
            params["m"] = json!(m);
            doc("power", exact, params, data)
        }
        Command::TvCurve {
            start,
            m_max,
            m_step,
        } => {
            if *m_step == 0 {
                return Err(Failure::Usage("--m-step must be at least 1".into()));
            }
            let j = model.state(*start, "start")?;
            let ms: Vec<u64> = (0..=*m_max).step_by(*m_step as usize).collect();
            let exact = resolve(cli, ms.len() as f64 * s * s * model.limbs(*m_max))?;
            let exp = SpectralExpansion::new(p);
            let rows = if exact {
                tv_rows::<Rational>(&exp, j, &ms)?
            } else {
                tv_rows::<f64>(&exp, j, &ms)?
            };
            let mut params = model.json();
            params["start"] = json!(start);
            doc(
                "tv-curve",
                exact,
                params,
                Data::Table {
                    columns: vec!["m", "tv"],
                    rows,
                },
            )
        }
        Command::Bounds {
            kind,
            c,
            constant,
            measure,
        } => {
            let specs = c
                .iter()
                .map(|&c| mixing_bound(p, *kind, c, *constant))
                .collect::<bl_core::Result<Vec<_>>>()?;
            let m_max = specs.iter().map(|b| b.m).max().unwrap_or(0);
            let per_point = match kind {
                BoundKind::Upper => s * s * s,
                BoundKind::Lower => s * s,
            };
            let cost = if *measure {
                specs.len() as f64 * per_point * model.limbs(m_max)
            } else {
                0.0
            };
            let exact = resolve(cli, cost)?;
            let exp = measure.then(|| SpectralExpansion::new(p));
            let mut rows = Vec::with_capacity(specs.len());
            for b in &specs {
                let mut row = vec![Cell::Float(b.c), count(b.m), Cell::Float(b.bound_value)];
                if let Some(exp) = &exp {
                    row.push(if exact {
                        measured::<Rational>(exp, *kind, b.m)?
                    } else {
                        measured::<f64>(exp, *kind, b.m)?
                    });
                }
                rows.push(row);
            }
            let mut columns = vec!["c", "m", "bound"];
            if *measure {
                columns.push("measured");
            }
            let mut params = model.json();
            params["kind"] = json!(kind);
            params["constant"] = json!(constant);
            doc("bounds", exact, params, Data::Table { columns, rows })
        }
        Command::Cutoff { start, epsilon } => {
            let j = model.state(*start, "start")?;
            let m = cutoff_scan(&SpectralExpansion::new(p), j, *epsilon)?;
            let mut params = model.json();
            params["start"] = json!(start);
            doc(
                "cutoff",
                false,
                params,
                Data::Table {
                    columns: vec!["epsilon", "m"],
                    rows: vec![vec![Cell::Float(*epsilon), count(m)]],
                },
            )
        }
        Command::Simulate {
            start,
            m,
            walkers,
            seed,
        } => {
            let j = model.state(*start, "start")?;
            let report = simulate(p, j, *m, *walkers, *seed)?;
            let labels = model.labels();
            let empirical: Vec<f64> = labels.iter().map(|&(_, c)| report.empirical[c]).collect();
            let exact: Vec<f64> = labels.iter().map(|&(_, c)| report.exact[c]).collect();
            let object = json!({
                "start": start,
                "steps": m,
                "walkers": walkers,
                "seed": seed,
                "tv_vs_exact": report.tv_vs_exact,
                "states": labels.iter().map(|&(i, _)| i).collect::<Vec<_>>(),
                "empirical": empirical,
                "exact": exact,
            });
            let table = Data::Table {
                columns: vec!["i", "empirical", "exact"],
                rows: labels
                    .iter()
                    .zip(empirical.iter().zip(&exact))
                    .map(|(&(i, _), (&e, &x))| vec![count(i), Cell::Float(e), Cell::Float(x)])
                    .collect(),
            };
            doc(
                "simulate",
                false,
                model.json(),
                Data::Report {
                    object,
                    table: Box::new(table),
                },
            )
        }
        Command::Verify { .. } => unreachable!("handled above"),
    };
    Ok((document, Ok(())))
}

fn power_data<S: PowerBackend + IntoCell>(model: &Model, exp: &SpectralExpansion, m: u64) -> Data {
    let t = exp.power::<S>(m);
    let labels = model.labels();
    let rows = labels
        .iter()
        .map(|&(_, ci)| {
            labels
                .iter()
                .map(|&(_, cj)| t[(ci, cj)].clone().cell())
                .collect()
        })
        .collect();
    Data::Matrix {
        labels: labels.into_iter().map(|(i, _)| i).collect(),
        rows,
    }
}

fn tv_rows<S: PowerBackend + IntoCell>(
    exp: &SpectralExpansion,
    j: usize,
    ms: &[u64],
) -> Result<Vec<Vec<Cell>>, Failure> {
    Ok(tv_curve::<S>(exp, j, ms)?
        .points
        .into_iter()
        .map(|(m, tv)| vec![count(m), tv.cell()])
        .collect())
}

/// `E_pi[TV]` for the upper bound, `2 TV` from state 0 for the lower.
fn measured<S: PowerBackend + IntoCell>(
    exp: &SpectralExpansion,
    kind: BoundKind,
    m: u64,
) -> Result<Cell, Failure> {
    let v = match kind {
        BoundKind::Upper => expected_bound_check::<S>(exp, m)?.average,
        BoundKind::Lower => exp.tv_from_start::<S>(0, m)? * S::from_int(2),
    };
    Ok(v.cell())
}

fn verify(max_n: u32) -> Outcome {
    let results = run_suite(max_n);
    let failed = results.iter().filter(|r| !r.passed).count();
    let rows = results
        .into_iter()
        .map(|r| {
            vec![
                Cell::Text(r.name.to_string()),
                Cell::Text(if r.passed { "PASS" } else { "FAIL" }.to_string()),
                count(r.cases),
                Cell::Text(r.failure.unwrap_or_default()),
            ]
        })
        .collect();
    let document = doc(
        "verify",
        true,
        json!({ "max_n": max_n }),
        Data::Table {
            columns: vec!["invariant", "status", "cases", "failure"],
            rows,
        },
    );
    let outcome = if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{failed} invariants failed")))
    };
    (document, outcome)
}
