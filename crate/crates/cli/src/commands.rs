use std::path::{Path, PathBuf};

use psd_schur::channels::{
    capacity_d, is_trace_preserving, kraus_from_choi, map_from_choi, normalize_trace_preserving,
    ChoiMatrix,
};
use psd_schur::matcore::is_hermitian;
use psd_schur::random::{self, SplitMix64};
use psd_schur::schur;
use psd_schur::states::{
    entropy_e, entropy_e0, is_pure, is_separable_params, is_separable_ppt, pure_vector,
    DensityState, SeparabilityVerdict, Witness,
};
use psd_schur::{ComplexMatrix, SchurParams, Tolerance};
use serde_json::{json, Value};

use crate::files::{complex, number, read_json, read_matrix, write_json, write_matrix};
use crate::files::{MatrixFile, ParamsFile};
use crate::{golden, CliError, Command, Kind, Method, SepMethod};

pub fn dispatch(cmd: Command, tol: Tolerance) -> Result<Option<Value>, CliError> {
    match cmd {
        Command::Parametrize { input, out, method } => parametrize(&input, &out, method, tol),
        Command::Reconstruct {
            input,
            out,
            cholesky,
        } => reconstruct(&input, &out, cholesky.as_deref()),
        Command::State { input, report } => state(&input, report, tol),
        Command::Channel {
            choi,
            din,
            dout,
            kraus,
            capacity,
        } => channel(&choi, din, dout, kraus.as_deref(), capacity, tol),
        Command::Separability {
            input,
            dims,
            method,
        } => separability(&input, &dims, method, tol),
        Command::Random {
            kind,
            dim,
            seed,
            rank,
            trace_preserving,
            out,
        } => {
            let m = random_instance(kind, dim, seed, rank, trace_preserving, tol)?;
            match out {
                Some(path) => {
                    write_matrix(&path, &m)?;
                    Ok(None)
                }
                None => Ok(Some(
                    serde_json::to_value(MatrixFile::from_matrix(&m)).unwrap(),
                )),
            }
        }
        Command::Golden { out_dir, seed } => {
            let names = golden::write_all(&out_dir, seed)?;
            Ok(Some(json!({ "seed": seed, "files": names })))
        }
    }
}

fn require_hermitian(m: &ComplexMatrix, tol: Tolerance) -> Result<(), CliError> {
    if !m.is_square() {
        return Err(CliError::Usage(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !is_hermitian(m, tol)? {
        return Err(CliError::Rejected("matrix is not Hermitian".into()));
    }
    Ok(())
}

pub fn parametrize_matrix(
    s: &ComplexMatrix,
    method: Method,
    tol: Tolerance,
) -> Result<SchurParams, CliError> {
    require_hermitian(s, tol)?;
    Ok(match method {
        Method::Direct => schur::inverse(s, tol)?,
        Method::Displacement => schur::displacement_inverse(s, tol)?.params,
    })
}

fn parametrize(
    input: &Path,
    out: &Path,
    method: Method,
    tol: Tolerance,
) -> Result<Option<Value>, CliError> {
    let s = read_matrix(input)?;
    let p = parametrize_matrix(&s, method, tol)?;
    write_json(out, &ParamsFile::from_params(&p))?;
    let undefined = p.entries().filter(|e| !e.3).count();
    Ok(Some(json!({
        "dim": p.dim(),
        "method": format!("{method:?}").to_lowercase(),
        "undefined": undefined,
        "determinant": number(schur::det_from_params(&p)),
    })))
}

fn reconstruct(
    input: &Path,
    out: &Path,
    cholesky: Option<&Path>,
) -> Result<Option<Value>, CliError> {
    let p = read_json::<ParamsFile>(input)?.to_params()?;
    write_matrix(out, &schur::forward(&p))?;
    if let Some(path) = cholesky {
        write_matrix(path, &schur::scaled_cholesky_factor(&p))?;
    }
    Ok(Some(json!({
        "dim": p.dim(),
        "determinant": number(schur::det_from_params(&p)),
    })))
}

fn load_state(rho: ComplexMatrix, tol: Tolerance) -> Result<DensityState, CliError> {
    if !rho.is_square() {
        return Err(CliError::Usage(format!(
            "expected a square matrix, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    DensityState::new(rho, tol).map_err(|e| match e {
        psd_schur::Error::Dimension(m) => CliError::Usage(m),
        other => CliError::Rejected(format!("not a density matrix: {}", CliError::from(other))),
    })
}

pub fn state_report(s: &DensityState, full: bool, tol: Tolerance) -> Value {
    let pure = is_pure(s, tol);
    let mut report = json!({
        "dim": s.dim(),
        "pure": pure,
        "entropy_E": number(entropy_e(s)),
        "entropy_E0": number(entropy_e0(s, tol)),
        "populations": s.populations().into_iter().map(number).collect::<Vec<_>>(),
    });
    if pure {
        if let Ok(v) = pure_vector(s, tol) {
            report["pure_vector"] = Value::from(v.into_iter().map(complex).collect::<Vec<_>>());
        }
    }
    if full {
        report["params"] = serde_json::to_value(ParamsFile::from_params(s.params())).unwrap();
        report["coefficients"] = json!({
            "beta": s.coeffs().beta,
            "gamma": s.coeffs().gamma,
        });
    }
    report
}

fn state(input: &Path, full: bool, tol: Tolerance) -> Result<Option<Value>, CliError> {
    let s = load_state(read_matrix(input)?, tol)?;
    Ok(Some(state_report(&s, full, tol)))
}

fn kraus_path(prefix: &str, n: usize) -> PathBuf {
    PathBuf::from(format!("{prefix}_{n}.json"))
}

fn channel(
    choi_path: &Path,
    din: usize,
    dout: usize,
    kraus: Option<&str>,
    capacity: bool,
    tol: Tolerance,
) -> Result<Option<Value>, CliError> {
    let s = read_matrix(choi_path)?;
    if din == 0 || dout == 0 || s.rows() != din * dout || s.cols() != din * dout {
        return Err(CliError::Usage(format!(
            "--din {din} --dout {dout} needs a {n}x{n} Choi matrix, got {}x{}",
            s.rows(),
            s.cols(),
            n = din * dout
        )));
    }
    require_hermitian(&s, tol)?;
    let choi = ChoiMatrix::new(din, dout, s)?;
    if let Err(e) = schur::inverse(choi.matrix(), tol) {
        return Err(CliError::Rejected(format!(
            "not completely positive: {}",
            CliError::from(e)
        )));
    }
    let mut out = json!({
        "d_in": din,
        "d_out": dout,
        "completely_positive": true,
        "trace_preserving": is_trace_preserving(&map_from_choi(&choi), tol),
    });
    if let Some(prefix) = kraus {
        let set = kraus_from_choi(&choi, tol)?;
        let mut names = Vec::new();
        for (n, k) in set.operators().iter().enumerate() {
            let path = kraus_path(prefix, n + 1);
            write_matrix(&path, k)?;
            names.push(path.display().to_string());
        }
        out["kraus_files"] = Value::from(names);
    }
    if capacity {
        out["capacity"] = number(capacity_d(&choi, tol)?);
    }
    Ok(Some(out))
}

pub fn parse_dims(dims: &str) -> Result<(usize, usize), CliError> {
    match dims {
        "2x2" => Ok((2, 2)),
        "2x3" => Ok((2, 3)),
        "3x2" => Ok((3, 2)),
        other => Err(CliError::Usage(format!(
            "--dims must be 2x2, 2x3 or 3x2, got {other:?}"
        ))),
    }
}

pub fn verdict_json(v: &SeparabilityVerdict, dims: (usize, usize)) -> Value {
    let witness = match &v.witness {
        None => Value::Null,
        Some(Witness::MinEigenvalue(x)) => json!({ "min_eigenvalue": number(*x) }),
        Some(Witness::Parameters {
            h14,
            h13,
            h24,
            last,
        }) => json!({
            "h14": complex(*h14),
            "h13": complex(*h13),
            "h24": complex(*h24),
            "last": complex(*last),
        }),
        Some(Witness::Infeasible(why)) => json!({ "infeasible": why }),
    };
    json!({
        "dims": format!("{}x{}", dims.0, dims.1),
        "separable": v.separable,
        "method": match v.method {
            psd_schur::states::SeparabilityMethod::Ppt => "ppt",
            psd_schur::states::SeparabilityMethod::ParamInequalities => "params",
        },
        "witness": witness,
    })
}

fn separability(
    input: &Path,
    dims: &str,
    method: SepMethod,
    tol: Tolerance,
) -> Result<Option<Value>, CliError> {
    let dims = parse_dims(dims)?;
    let rho = read_matrix(input)?;
    if rho.rows() != dims.0 * dims.1 {
        return Err(CliError::Usage(format!(
            "a {}x{} system needs a {n}x{n} matrix, got {}x{}",
            dims.0,
            dims.1,
            rho.rows(),
            rho.cols(),
            n = dims.0 * dims.1
        )));
    }
    let s = load_state(rho, tol)?;
    let verdict = match method {
        SepMethod::Ppt => is_separable_ppt(&s, dims, tol)?,
        SepMethod::Params if dims == (2, 2) => is_separable_params(&s, tol)?,
        SepMethod::Params => {
            return Err(CliError::Usage("--method params supports 2x2 only".into()))
        }
    };
    Ok(Some(verdict_json(&verdict, dims)))
}

/// Seeded instances:
/// - `psd`: `X* X` with `X` a `rank x d` complex Gaussian, scaled to trace `d`;
/// - `state`: the same scaled to trace 1;
/// - `channel`: a full-rank Choi matrix on `d x d`, scaled to trace `d`, or
///   projected to trace preserving.
pub fn random_instance(
    kind: Kind,
    dim: usize,
    seed: u64,
    rank: Option<usize>,
    trace_preserving: bool,
    tol: Tolerance,
) -> Result<ComplexMatrix, CliError> {
    if dim == 0 || (kind != Kind::Psd && dim < 2) {
        return Err(CliError::Usage(format!("unsupported --dim {dim}")));
    }
    let rank = rank.unwrap_or(dim);
    if rank == 0 {
        return Err(CliError::Usage("--rank must be positive".into()));
    }
    let mut rng = SplitMix64::new(seed);
    Ok(match kind {
        Kind::Psd => {
            let g = random::gram(&mut rng, dim, rank);
            let tr = g.trace().re;
            g.scale_real(dim as f64 / tr)
        }
        Kind::State => random::density(&mut rng, dim, rank),
        Kind::Channel => {
            let n = dim * dim;
            let g = random::gram(&mut rng, n, n);
            let tr = g.trace().re;
            let choi = ChoiMatrix::new(dim, dim, g.scale_real(dim as f64 / tr))?;
            if trace_preserving {
                normalize_trace_preserving(&choi, tol)?.into_matrix()
            } else {
                choi.into_matrix()
            }
        }
    })
}
