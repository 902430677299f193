//! Process tomography on one or two qubits, Kraus extraction and average gate fidelity.
//!
//! The operator basis is Ẽ = {I, σx, −iσy, σz} (all real) and its Kronecker
//! squares for two qubits, with index `4·m₁ + m₂`.

use std::io::Write;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{eig_hermitian, kron, propagate_final, ComplexMatrix, DensityMatrix, LindbladGenerator, TimeGrid, I};

pub const BASIS_LABELS: [&str; 4] = ["I", "X", "-iY", "Z"];
/// Eigenvalues of χ below this are treated as numerical noise and clipped.
pub const CLIP_TOL: f64 = 1e-6;
/// Eigenvalues below this are a genuine CP violation.
pub const CP_VIOLATION: f64 = -1e-4;
const DROP_TOL: f64 = 1e-10;

/// Single-qubit basis Ẽ_m.
pub fn basis_operator(m: usize) -> ComplexMatrix {
    match m {
        0 => ComplexMatrix::identity(2),
        1 => ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
        2 => ComplexMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]),
        3 => ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]),
        _ => panic!("basis index {m} out of range"),
    }
}

/// Basis for `n_qubits` ∈ {1, 2}.
pub fn basis(n_qubits: usize) -> Vec<ComplexMatrix> {
    match n_qubits {
        1 => (0..4).map(basis_operator).collect(),
        _ => (0..16)
            .map(|m| kron(&basis_operator(m / 4), &basis_operator(m % 4)))
            .collect(),
    }
}

fn basis_label(n_qubits: usize, m: usize) -> String {
    if n_qubits == 1 {
        BASIS_LABELS[m].to_string()
    } else {
        format!("{}{}", BASIS_LABELS[m / 4], BASIS_LABELS[m % 4])
    }
}

fn check_qubits(n_qubits: usize) -> Result<usize> {
    match n_qubits {
        1 => Ok(2),
        2 => Ok(4),
        _ => Err(Error::Config(format!("tomography supports 1 or 2 qubits, got {n_qubits}"))),
    }
}

/// χ-matrix of a channel in the Ẽ basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessMatrix {
    pub n_qubits: usize,
    pub chi: ComplexMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChiPart {
    Re,
    Im,
    Abs,
}

#[derive(Serialize)]
struct ChiJson<'a> {
    n_qubits: usize,
    basis: Vec<String>,
    basis_note: &'a str,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl ProcessMatrix {
    pub fn dim(&self) -> usize {
        self.chi.dim()
    }

    /// Σ χ_mn Ẽ_m ρ Ẽ_n†.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let ops = basis(self.n_qubits);
        let mut out = ComplexMatrix::zeros(rho.dim());
        for (m, em) in ops.iter().enumerate() {
            let left = em.matmul(rho);
            for (n, en) in ops.iter().enumerate() {
                let c = self.chi[(m, n)];
                if c != C64::new(0.0, 0.0) {
                    out.axpy(c, &left.matmul(&en.adjoint()));
                }
            }
        }
        out
    }

    /// Σ χ_mn Ẽ_n†Ẽ_m, the identity for trace-preserving channels.
    pub fn trace_condition(&self) -> ComplexMatrix {
        let ops = basis(self.n_qubits);
        let mut out = ComplexMatrix::zeros(ops[0].dim());
        for (m, em) in ops.iter().enumerate() {
            for (n, en) in ops.iter().enumerate() {
                out.axpy(self.chi[(m, n)], &en.adjoint().matmul(em));
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let d = self.dim();
        let grid = |f: fn(C64) -> f64| -> Vec<Vec<f64>> {
            (0..d).map(|r| (0..d).map(|c| f(self.chi[(r, c)])).collect()).collect()
        };
        let doc = ChiJson {
            n_qubits: self.n_qubits,
            basis: (0..d).map(|m| basis_label(self.n_qubits, m)).collect(),
            basis_note: "third single-qubit element is -i*sigma_y, so all basis matrices are real",
            re: grid(|z| z.re),
            im: grid(|z| z.im),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Matrix-layout CSV: a header of basis labels, then one labelled row per χ row.
    pub fn write_heatmap_csv<W: Write>(&self, w: W, part: ChiPart) -> Result<()> {
        let d = self.dim();
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec![String::from("basis")];
        header.extend((0..d).map(|m| basis_label(self.n_qubits, m)));
        wr.write_record(&header)?;
        for r in 0..d {
            let mut row = vec![basis_label(self.n_qubits, r)];
            row.extend((0..d).map(|c| {
                let z = self.chi[(r, c)];
                let v = match part {
                    ChiPart::Re => z.re,
                    ChiPart::Im => z.im,
                    ChiPart::Abs => z.norm(),
                };
                format!("{v:.12e}")
            }));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Kraus representation G(ρ) = Σ G_k ρ G_k†.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausSet {
    pub operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(rho.dim());
        for g in &self.operators {
            out += &g.matmul(rho).matmul(&g.adjoint());
        }
        out
    }

    /// Σ G_k†G_k.
    pub fn completeness(&self) -> ComplexMatrix {
        let d = self.operators.first().map(|g| g.dim()).unwrap_or(0);
        let mut out = ComplexMatrix::zeros(d);
        for g in &self.operators {
            out += &g.adjoint().matmul(g);
        }
        out
    }
}

/// Positive projectors (d² of them) whose combinations reproduce every |i⟩⟨j|.
///
/// Returns the projector list and, for each (i, j), the coefficients on it.
fn input_decomposition(d: usize) -> (Vec<ComplexMatrix>, Vec<Vec<(usize, C64)>>) {
    let mut projectors = Vec::new();
    let mut recipes = vec![Vec::new(); d * d];
    for i in 0..d {
        projectors.push(ComplexMatrix::unit(d, i, i));
        recipes[i * d + i] = vec![(projectors.len() - 1, C64::new(1.0, 0.0))];
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in i + 1..d {
            let base = projectors.len();
            for phase in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                let mut v = vec![C64::new(0.0, 0.0); d];
                v[i] = C64::new(s, 0.0);
                v[j] = phase * s;
                projectors.push(ComplexMatrix::projector(&v));
            }
            // |i><j| = P₊ + iP₊ᵢ − ½(1 + i)(Pᵢ + Pⱼ), and its adjoint for |j><i|
            let half = C64::new(0.5, 0.5);
            recipes[i * d + j] = vec![(base, C64::new(1.0, 0.0)), (base + 1, I), (i, -half), (j, -half)];
            recipes[j * d + i] = vec![
                (base, C64::new(1.0, 0.0)),
                (base + 1, -I),
                (i, -half.conj()),
                (j, -half.conj()),
            ];
        }
    }
    (projectors, recipes)
}

/// Images of the tomography inputs under a channel given on qubit-space density matrices.
///
/// Output `d·i + j` is G(|i⟩⟨j|) with |i⟩ the computational basis state `i`
/// (for one qubit: G(ρ₁), G(ρ₁σx), G(σxρ₁), G(σxρ₁σx)).
/// Non-Hermitian inputs are obtained by linearity from positive projectors,
/// which are propagated in parallel.
pub fn simulate_process_with<F>(n_qubits: usize, channel: F) -> Result<Vec<ComplexMatrix>>
where
    F: Fn(&DensityMatrix) -> Result<ComplexMatrix> + Sync,
{
    let d = check_qubits(n_qubits)?;
    let (projectors, recipes) = input_decomposition(d);
    let images: Vec<ComplexMatrix> = projectors
        .into_par_iter()
        .map(|p| channel(&DensityMatrix::new(p)?))
        .collect::<Result<_>>()?;
    Ok(recipes
        .iter()
        .map(|recipe| {
            let mut out = ComplexMatrix::zeros(d);
            for &(k, c) in recipe {
                out.axpy(c, &images[k]);
            }
            out
        })
        .collect())
}

/// Tomography outputs for a Lindblad evolution whose qubit lives on `levels`.
///
/// Population leaking out of `levels` is lost, so the reconstructed channel
/// need not be trace preserving.
pub fn simulate_process(
    gen: &LindbladGenerator,
    grid: &TimeGrid,
    levels: &[usize],
) -> Result<Vec<ComplexMatrix>> {
    let n_qubits = match levels.len() {
        2 => 1,
        4 => 2,
        k => return Err(Error::Config(format!("qubit subspace must have 2 or 4 levels, got {k}"))),
    };
    let dim = gen.dim();
    simulate_process_with(n_qubits, |rho| {
        let full = DensityMatrix::new(rho.matrix().embed(dim, levels))?;
        Ok(propagate_final(gen, &full, grid)?.matrix().submatrix(levels))
    })
}

fn lambda1() -> ComplexMatrix {
    // [[I, X], [X, -I]]
    ComplexMatrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 1.0],
        &[0.0, 1.0, 1.0, 0.0],
        &[0.0, 1.0, -1.0, 0.0],
        &[1.0, 0.0, 0.0, -1.0],
    ])
}

fn check_outputs(outputs: &[ComplexMatrix], count: usize, dim: usize) -> Result<()> {
    if outputs.len() != count {
        return Err(Error::Dimension {
            expected: count,
            got: outputs.len(),
        });
    }
    outputs.iter().try_for_each(|m| m.check_dim(dim))
}

/// χ = ¼ Λ R Λ with R = [[ρ′₁, ρ′₂], [ρ′₃, ρ′₄]] and Λ = [[I, σx], [σx, −I]].
pub fn qpt_single(outputs: &[ComplexMatrix]) -> Result<ProcessMatrix> {
    check_outputs(outputs, 4, 2)?;
    let r = ComplexMatrix::from_fn(4, |row, col| outputs[2 * (row / 2) + col / 2][(row % 2, col % 2)]);
    let l = lambda1();
    let chi = l.matmul(&r).matmul(&l).scale_real(0.25);
    Ok(ProcessMatrix { n_qubits: 1, chi })
}

/// Swaps the two middle bits of a 4-bit index.
fn middle_swap(k: usize) -> usize {
    let (b3, b2, b1, b0) = ((k >> 3) & 1, (k >> 2) & 1, (k >> 1) & 1, k & 1);
    (b3 << 3) | (b1 << 2) | (b2 << 1) | b0
}

/// χ = Λ Pᵀρ′P Λ with Λ = ¼(Λ₁ ⊗ Λ₁) and P = I ⊗ SWAP ⊗ I.
pub fn qpt_two(outputs: &[ComplexMatrix]) -> Result<ProcessMatrix> {
    check_outputs(outputs, 16, 4)?;
    let rho = ComplexMatrix::from_fn(16, |row, col| outputs[4 * (row / 4) + col / 4][(row % 4, col % 4)]);
    let perm = ComplexMatrix::from_fn(16, |r, c| {
        if r == middle_swap(c) {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let bar = perm.transpose().matmul(&rho).matmul(&perm);
    let l1 = lambda1();
    let lam = kron(&l1, &l1).scale_real(0.25);
    let chi = lam.matmul(&bar).matmul(&lam);
    Ok(ProcessMatrix { n_qubits: 2, chi })
}

/// Diagonalizes χ = UDU† and returns G_k = √D_k Σ_m U_mk Ẽ_m.
pub fn kraus_from_chi(chi: &ProcessMatrix) -> Result<KrausSet> {
    let herm = chi.chi.hermitian_part();
    if chi.chi.max_abs_diff(&herm) > 1e-8 * chi.chi.max_abs().max(1.0) {
        return Err(Error::Precondition("process matrix is not Hermitian".into()));
    }
    let eig = eig_hermitian(&herm)?;
    let ops = basis(chi.n_qubits);
    let mut operators = Vec::new();
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda < CP_VIOLATION {
            return Err(Error::NotCompletelyPositive { eigenvalue: lambda });
        }
        if lambda < -CLIP_TOL {
            log::warn!("clipping negative process-matrix eigenvalue {lambda:.3e}");
        }
        if lambda < DROP_TOL {
            continue;
        }
        let v = eig.vector(k);
        let mut g = ComplexMatrix::zeros(ops[0].dim());
        for (m, e) in ops.iter().enumerate() {
            g.axpy(v[m] * lambda.sqrt(), e);
        }
        operators.push(g);
    }
    Ok(KrausSet { operators })
}

/// F = (1/(n(n+1))) Σ_k [Tr(M_k M_k†) + |Tr M_k|²], M_k = U₀†G_k.
pub fn avg_gate_fidelity(kraus: &KrausSet, target: &ComplexMatrix) -> Result<f64> {
    let n = target.dim();
    let u_dag = target.adjoint();
    let mut sum = 0.0;
    for g in &kraus.operators {
        g.check_dim(n)?;
        let m = u_dag.matmul(g);
        sum += m.matmul(&m.adjoint()).trace().re + m.trace().norm_sqr();
    }
    Ok(sum / (n * (n + 1)) as f64)
}

/// Result of the full tomography pipeline for one gate run.
#[derive(Clone, Debug)]
pub struct GateReport {
    pub process: ProcessMatrix,
    pub kraus: KrausSet,
    pub fidelity: f64,
}

/// simulate_process → qpt → kraus_from_chi → avg_gate_fidelity.
pub fn gate_fidelity(
    gen: &LindbladGenerator,
    grid: &TimeGrid,
    levels: &[usize],
    target: &ComplexMatrix,
) -> Result<GateReport> {
    let outputs = simulate_process(gen, grid, levels)?;
    let process = if levels.len() == 2 {
        qpt_single(&outputs)?
    } else {
        qpt_two(&outputs)?
    };
    let kraus = kraus_from_chi(&process)?;
    let fidelity = avg_gate_fidelity(&kraus, target)?;
    Ok(GateReport {
        process,
        kraus,
        fidelity,
    })
}
