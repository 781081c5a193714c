//! Triangulated Maximally Filtered Graph.
//!
//! The graph starts from the 4-clique of largest total similarity and grows
//! by inserting, one vertex at a time, the (vertex, triangular face) pair of
//! largest gain into that face. Each insertion replaces the host face by
//! three new faces, so the result is a chordal maximal planar graph with
//! `3N − 6` edges.

pub mod graph;
mod verify;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ewcorr::WeightedCorrelationMatrix;
use crate::Scalar;

pub use verify::{verify, Check, VerificationReport};

/// How many top vertices by similarity row-sum are scanned for the seed clique.
pub const SEED_CANDIDATES: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum TmfgError {
    #[error("TMFG needs at least 4 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("invalid similarity matrix: {0}")]
    InvalidSimilarity(String),
}

/// Correlation-to-similarity transform.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityTransform {
    /// `ρ²`
    #[default]
    Square,
    /// `|ρ|`
    Abs,
    /// `(1 + ρ) / 2`
    Shift,
}

impl SimilarityTransform {
    pub fn apply<T: Scalar>(self, rho: T) -> T {
        match self {
            SimilarityTransform::Square => rho * rho,
            SimilarityTransform::Abs => rho.abs(),
            SimilarityTransform::Shift => (T::one() + rho) / T::of(2.0),
        }
    }
}

impl std::str::FromStr for SimilarityTransform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "square" => Ok(Self::Square),
            "abs" => Ok(Self::Abs),
            "shift" | "raw_shifted" => Ok(Self::Shift),
            other => Err(format!("unknown similarity transform `{other}` (square|abs|shift)")),
        }
    }
}

/// Symmetric, non-negative similarities with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix<T> {
    symbols: Vec<String>,
    values: Array2<T>,
}

impl<T: Scalar> SimilarityMatrix<T> {
    pub fn new(symbols: Vec<String>, values: Array2<T>) -> Result<Self, TmfgError> {
        let n = symbols.len();
        if values.dim() != (n, n) {
            return Err(TmfgError::InvalidSimilarity(format!("shape {:?} for {n} symbols", values.dim())));
        }
        for i in 0..n {
            if values[(i, i)] != T::zero() {
                return Err(TmfgError::InvalidSimilarity(format!("non-zero diagonal at {i}")));
            }
            for j in 0..i {
                let v = values[(i, j)];
                if !(v.is_finite() && v >= T::zero()) || v != values[(j, i)] {
                    return Err(TmfgError::InvalidSimilarity(format!("entry ({i}, {j}) = {v} invalid")));
                }
            }
        }
        Ok(Self { symbols, values })
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Similarity of `v` to the three vertices of `face`, summed in face order.
    pub fn gain(&self, v: usize, face: &[usize; 3]) -> T {
        self.values[(v, face[0])] + self.values[(v, face[1])] + self.values[(v, face[2])]
    }
}

pub fn to_similarity<T: Scalar>(
    corr: &WeightedCorrelationMatrix<T>,
    transform: SimilarityTransform,
) -> SimilarityMatrix<T> {
    let n = corr.len();
    let values =
        Array2::from_shape_fn((n, n), |(i, j)| if i == j { T::zero() } else { transform.apply(corr.values[(i, j)]) });
    SimilarityMatrix { symbols: corr.symbols.clone(), values }
}

/// One T2 move: `vertex` placed inside the face `host`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Insertion {
    pub vertex: usize,
    pub host: [usize; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredGraph<T> {
    pub symbols: Vec<String>,
    /// `(i, j, weight)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize, T)>,
    /// Faces of the final triangulation, each sorted ascending.
    pub triangles: Vec<[usize; 3]>,
    pub insertion_log: Vec<Insertion>,
    pub seed: [usize; 4],
}

impl<T: Scalar> FilteredGraph<T> {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn total_weight(&self) -> T {
        self.edges.iter().map(|e| e.2).sum()
    }

    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|&(i, j, _)| (i, j)).collect()
    }

    /// Dense weighted adjacency; `binary` replaces every weight by one.
    pub fn adjacency(&self, binary: bool) -> Array2<T> {
        let n = self.len();
        let mut a = Array2::zeros((n, n));
        for &(i, j, w) in &self.edges {
            let w = if binary { T::one() } else { w };
            a[(i, j)] = w;
            a[(j, i)] = w;
        }
        a
    }
}

/// Seed clique: among the top vertices by row-sum, the 4-subset of largest
/// total pairwise similarity; ties go to the lexicographically smallest set.
fn seed_clique<T: Scalar>(sim: &SimilarityMatrix<T>) -> [usize; 4] {
    let n = sim.len();
    let s = sim.values();
    let row_sums: Vec<T> = (0..n).map(|i| s.row(i).iter().copied().sum()).collect();
    let mut ranked: Vec<usize> = (0..n).collect();
    ranked.sort_by(|&a, &b| row_sums[b].partial_cmp(&row_sums[a]).unwrap().then(a.cmp(&b)));
    let mut cand: Vec<usize> = ranked.into_iter().take(SEED_CANDIDATES.min(n)).collect();
    cand.sort_unstable();

    let k = cand.len();
    let mut best: Option<(T, [usize; 4])> = None;
    for a in 0..k {
        for b in (a + 1)..k {
            for c in (b + 1)..k {
                for d in (c + 1)..k {
                    let q = [cand[a], cand[b], cand[c], cand[d]];
                    let w = s[(q[0], q[1])]
                        + s[(q[0], q[2])]
                        + s[(q[0], q[3])]
                        + s[(q[1], q[2])]
                        + s[(q[1], q[3])]
                        + s[(q[2], q[3])];
                    if best.is_none_or(|(bw, _)| w > bw) {
                        best = Some((w, q));
                    }
                }
            }
        }
    }
    best.expect("at least four candidates").1
}

struct Face<T> {
    vertices: [usize; 3],
    alive: bool,
    /// Best remaining vertex for this face and its gain.
    best: Option<(usize, T)>,
}

fn sorted3(mut f: [usize; 3]) -> [usize; 3] {
    f.sort_unstable();
    f
}

pub fn build_tmfg<T: Scalar>(sim: &SimilarityMatrix<T>) -> Result<FilteredGraph<T>, TmfgError> {
    let n = sim.len();
    if n < 4 {
        return Err(TmfgError::TooFewVertices(n));
    }
    let seed = seed_clique(sim);
    let mut inserted = vec![false; n];
    for &v in &seed {
        inserted[v] = true;
    }
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(3 * n - 6);
    for a in 0..4 {
        for b in (a + 1)..4 {
            edges.push((seed[a], seed[b]));
        }
    }

    // best (vertex, gain) for a face among not-yet-inserted vertices; ties to lowest vertex
    let best_for = |face: &[usize; 3], inserted: &[bool]| -> Option<(usize, T)> {
        let mut best: Option<(usize, T)> = None;
        for v in (0..n).filter(|&v| !inserted[v]) {
            let g = sim.gain(v, face);
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((v, g));
            }
        }
        best
    };

    let mut faces: Vec<Face<T>> = Vec::with_capacity(2 * n);
    let [a, b, c, d] = seed;
    for f in [[a, b, c], [a, b, d], [a, c, d], [b, c, d]] {
        faces.push(Face { vertices: f, alive: true, best: best_for(&f, &inserted) });
    }

    let mut log = Vec::with_capacity(n - 4);
    for _ in 4..n {
        // global argmax over (gain desc, vertex asc, face creation asc)
        let mut pick: Option<(usize, usize, T)> = None;
        for (fid, face) in faces.iter().enumerate() {
            let (true, Some((v, g))) = (face.alive, face.best) else { continue };
            let better = match pick {
                None => true,
                Some((_, pv, pg)) => g > pg || (g == pg && v < pv),
            };
            if better {
                pick = Some((fid, v, g));
            }
        }
        let (fid, v, _) = pick.expect("a live face with a candidate exists while vertices remain");
        let host = faces[fid].vertices;
        faces[fid].alive = false;
        inserted[v] = true;
        log.push(Insertion { vertex: v, host });
        for &u in &host {
            edges.push((u.min(v), u.max(v)));
        }

        for face in faces.iter_mut() {
            if face.alive && face.best.is_some_and(|(bv, _)| bv == v) {
                face.best = best_for(&face.vertices, &inserted);
            }
        }
        let [x, y, z] = host;
        for f in [[x, y, v], [x, z, v], [y, z, v]] {
            let f = sorted3(f);
            faces.push(Face { vertices: f, alive: true, best: best_for(&f, &inserted) });
        }
    }

    edges.sort_unstable();
    let s = sim.values();
    Ok(FilteredGraph {
        symbols: sim.symbols().to_vec(),
        edges: edges.into_iter().map(|(i, j)| (i, j, s[(i, j)])).collect(),
        triangles: faces.iter().filter(|f| f.alive).map(|f| f.vertices).collect(),
        insertion_log: log,
        seed,
    })
}
