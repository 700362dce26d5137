//! Golden files: closed-form examples next to the values the generic
//! routines produce, regenerated byte-identically from a seed.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use psd_schur::channels::{
    capacity_d, choi_from_map, kraus_from_choi, qubit_nf_choi, qubit_nf_params, LinearMap,
    QubitChannelNF,
};
use psd_schur::matcore::kron;
use psd_schur::random::SplitMix64;
use psd_schur::schur;
use psd_schur::states::DensityState;
use psd_schur::{ComplexMatrix, SchurParams, Tolerance, C64};
use serde_json::{json, Value};

use crate::commands::{random_instance, state_report};
use crate::files::{complex, number, write_json, MatrixFile, ParamsFile};
use crate::{CliError, Kind};

pub const DEFAULT_SEED: u64 = 20_240_601;

/// File names written by [`write_all`], in order.
pub const FILES: [&str; 5] = [
    "cosine_law.json",
    "tensor_example.json",
    "normal_form_gamma23.json",
    "depolarizing_capacity.json",
    "pipeline.json",
];

pub fn write_all(dir: &Path, seed: u64) -> Result<Vec<String>, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let docs = generate(seed)?;
    for (name, doc) in FILES.iter().zip(&docs) {
        write_json(&dir.join(name), doc)?;
    }
    Ok(FILES.iter().map(|s| s.to_string()).collect())
}

/// The documents in [`FILES`] order.
pub fn generate(seed: u64) -> Result<Vec<Value>, CliError> {
    let tol = Tolerance::default();
    let mut rng = SplitMix64::new(seed);
    Ok(vec![
        cosine_law(&mut rng),
        tensor_example(&mut rng, tol)?,
        normal_form(&mut rng, tol)?,
        depolarizing(&mut rng, tol)?,
        pipeline(&mut rng, tol)?,
    ])
}

fn params_json(p: &SchurParams) -> Value {
    serde_json::to_value(ParamsFile::from_params(p)).unwrap()
}

fn matrix_json(m: &ComplexMatrix) -> Value {
    serde_json::to_value(MatrixFile::from_matrix(m)).unwrap()
}

fn cosine_law(rng: &mut SplitMix64) -> Value {
    let cases: Vec<Value> = (0..8)
        .map(|_| {
            let th = rng.uniform_in(0.0, PI);
            let th1 = rng.uniform_in(0.0, PI);
            let phi = rng.uniform_in(0.0, PI);
            let mut p = SchurParams::identity(3);
            p.set_gamma(0, 1, C64::new(th.cos(), 0.0)).unwrap();
            p.set_gamma(1, 2, C64::new(th1.cos(), 0.0)).unwrap();
            p.set_gamma(0, 2, C64::new(phi.cos(), 0.0)).unwrap();
            let s = schur::forward(&p);
            json!({
                "theta": th,
                "theta1": th1,
                "phi": phi,
                "params": params_json(&p),
                "s13": complex(s[(0, 2)]),
                "closed_form": th.cos() * th1.cos() + th.sin() * th1.sin() * phi.cos(),
            })
        })
        .collect();
    json!({ "cases": cases })
}

fn unit_2x2(a: C64) -> ComplexMatrix {
    let one = C64::new(1.0, 0.0);
    ComplexMatrix::from_complex_rows(&[&[one, a], &[a.conj(), one]]).unwrap()
}

fn tensor_example(rng: &mut SplitMix64, tol: Tolerance) -> Result<Value, CliError> {
    let mut pairs = vec![(C64::new(0.5, 0.0), C64::new(0.5, 0.0))];
    pairs.extend((0..6).map(|_| (rng.in_disc(0.95), rng.in_disc(0.95))));
    let mut cases = Vec::new();
    for (a, b) in pairs {
        let p = schur::inverse(&kron(&unit_2x2(a), &unit_2x2(b)), tol)?;
        let side = a * (1.0 - b.norm_sqr()).sqrt() / (1.0 - a.norm_sqr() * b.norm_sqr()).sqrt();
        let labelled = |g: [C64; 6]| {
            json!({
                "12": complex(g[0]), "23": complex(g[1]), "34": complex(g[2]),
                "13": complex(g[3]), "24": complex(g[4]), "14": complex(g[5]),
            })
        };
        cases.push(json!({
            "a12": complex(a),
            "b12": complex(b),
            "computed": labelled([
                p.gamma(0, 1), p.gamma(1, 2), p.gamma(2, 3),
                p.gamma(0, 2), p.gamma(1, 3), p.gamma(0, 3),
            ]),
            "closed_form": labelled([b, a * b.conj(), b, side, side, -a * b]),
        }));
    }
    Ok(json!({ "cases": cases }))
}

fn normal_form(rng: &mut SplitMix64, tol: Tolerance) -> Result<Value, CliError> {
    let mut cases = Vec::new();
    while cases.len() < 8 {
        let nf = QubitChannelNF {
            t: [0.0, 0.0, rng.uniform_in(-0.3, 0.3)],
            lambda: [
                rng.uniform_in(-0.6, 0.6),
                rng.uniform_in(-0.6, 0.6),
                rng.uniform_in(-0.6, 0.6),
            ],
        };
        let report = qubit_nf_params(&nf, tol);
        if !report.completely_positive() {
            continue;
        }
        let (_, hat) = qubit_nf_choi(&nf);
        let generic = schur::inverse(&hat.matrix().scale_real(2.0), tol)?;
        let [l1, l2, _] = nf.lambda;
        let d = report.diag;
        cases.push(json!({
            "t": nf.t,
            "lambda": nf.lambda,
            "closed_form": (l1 - l2) / (d[1] * d[2]).sqrt(),
            "gamma23": report.raw[0].map_or(Value::Null, complex),
            "generic": complex(generic.gamma(1, 2)),
        }));
    }
    Ok(json!({ "cases": cases }))
}

fn depolarizing(rng: &mut SplitMix64, tol: Tolerance) -> Result<Value, CliError> {
    let dep = capacity_d(&choi_from_map(&LinearMap::depolarizing(2)), tol)?;
    let mut family = Vec::new();
    while family.len() < 8 {
        let l = [
            rng.uniform_in(-1.0, 1.0),
            rng.uniform_in(-1.0, 1.0),
            rng.uniform_in(-1.0, 1.0),
        ];
        let (l1, l2, l3) = (l[0], l[1], l[2]);
        if (l1 + l2).abs() >= 1.0 + l3 - 1e-6 || (l1 - l2).abs() >= 1.0 - l3 - 1e-6 {
            continue;
        }
        let (choi, _) = qubit_nf_choi(&QubitChannelNF {
            t: [0.0; 3],
            lambda: l,
        });
        let formula = -0.25
            * (2.0 * ((1.0 + l3) / 2.0).ln()
                + 2.0 * ((1.0 - l3) / 2.0).ln()
                + (1.0 - ((l1 - l2) / (1.0 - l3)).powi(2)).ln()
                + (1.0 - ((l1 + l2) / (1.0 + l3)).powi(2)).ln());
        family.push(json!({
            "lambda": l,
            "capacity": number(capacity_d(&choi, tol)?),
            "formula": formula,
        }));
    }
    Ok(json!({
        "depolarizing_qubit": number(dep),
        "log2": std::f64::consts::LN_2,
        "unital_family": family,
    }))
}

fn pipeline(rng: &mut SplitMix64, tol: Tolerance) -> Result<Value, CliError> {
    let psd_seed = rng.next_u64();
    let s = random_instance(Kind::Psd, 4, psd_seed, None, false, tol)?;
    let direct = schur::inverse(&s, tol)?;
    let disp = schur::displacement_inverse(&s, tol)?.params;
    let back = schur::forward(&direct);

    let state_seed = rng.next_u64();
    let rho = random_instance(Kind::State, 3, state_seed, None, false, tol)?;
    let state = DensityState::new(rho, tol)?;

    let channel_seed = rng.next_u64();
    let choi_m = random_instance(Kind::Channel, 2, channel_seed, None, true, tol)?;
    let choi = psd_schur::channels::ChoiMatrix::new(2, 2, choi_m.clone())?;
    let kraus = kraus_from_choi(&choi, tol)?;

    Ok(json!({
        "psd": {
            "seed": psd_seed,
            "matrix": matrix_json(&s),
            "direct": params_json(&direct),
            "displacement": params_json(&disp),
            "reconstructed": matrix_json(&back),
        },
        "state": {
            "seed": state_seed,
            "report": state_report(&state, true, tol),
        },
        "channel": {
            "seed": channel_seed,
            "choi": matrix_json(&choi_m),
            "kraus": kraus.operators().iter().map(matrix_json).collect::<Vec<_>>(),
            "capacity": number(capacity_d(&choi, tol)?),
        },
    }))
}
