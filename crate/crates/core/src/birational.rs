//! Blowup lattices: the cohomology, tangent data and K-theory of `Bl_pt P²` assembled from
//! the base and the centre, the Orlov basis, and exact checks of its lattice decomposition.

use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::charclasses::{euler_gram, euler_pairing, EulerValue, KBasis, KClass, TangentData};
use crate::cohomology::GradedFrobeniusAlgebra;
use crate::error::{Error, Result};
use crate::exact::{self, rint, IntMatrix, Rat, RatMatrix};
use crate::numerics::PrecisionContext;
use crate::stokes::MutationSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BlowupPreset {
    /// The first Hirzebruch surface `F₁ = Bl_pt P²`.
    F1,
}

impl FromStr for BlowupPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace([' ', '_'], "").as_str() {
            "f1" | "blptp2" => Ok(Self::F1),
            _ => Err(Error::Unsupported(format!("blowup preset `{s}` is not built in (available: F1)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum BlockKind {
    /// `φ^* K(X)`.
    Pullback,
    /// `K(Z)_k = j_*(O(k) ⊗ π^* K(Z))`.
    Center { twist: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub name: String,
    pub kind: BlockKind,
    /// Positions of the block's classes in the ordered basis.
    pub members: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct BlowupData {
    pub name: String,
    pub base: TangentData,
    pub center: TangentData,
    pub codim: u32,
    pub tangent: TangentData,
    /// Column `i` is `φ^*` of the `i`-th base basis class.
    pub pullback: RatMatrix,
    /// Class of the exceptional divisor.
    pub exceptional: Vec<Rat>,
    /// `O, O(1), …` on the base.
    pub base_basis: KBasis,
}

impl BlowupData {
    pub fn algebra(&self) -> &GradedFrobeniusAlgebra {
        &self.tangent.algebra
    }

    pub fn pull_back(&self, a: &[Rat]) -> Vec<Rat> {
        exact::mat_vec(&self.pullback, a)
    }

    /// `ch(j_* O_E(k))` by Grothendieck–Riemann–Roch along the divisor inclusion,
    /// `j_*(e^{k E|_E} Td(N_E)^{-1}) = E · e^{kE} · (1 - e^{-E}) / E`.
    pub fn exceptional_sheaf(&self, k: i64) -> Result<KClass> {
        let alg = self.algebra();
        let e = &self.exceptional;
        let n = alg.dim_complex as usize;
        // (1 - e^{-x})/x = Σ (-1)^m x^m / (m+1)!
        let mut inv_todd = vec![Rat::zero(); alg.dim()];
        let mut power = alg.unit_class();
        let mut fact = Rat::one();
        for m in 0..=n {
            fact *= rint(m as i64 + 1);
            let c = rint(if m % 2 == 0 { 1 } else { -1 }) / &fact;
            for (x, y) in inv_todd.iter_mut().zip(&power) {
                *x += &c * y;
            }
            power = alg.cup_exact(&power, e);
        }
        let twist: Vec<Rat> = e.iter().map(|x| x * rint(k)).collect();
        let ch = alg.cup_exact(&alg.cup_exact(e, &alg.exp_nilpotent_exact(&twist)?), &inv_todd);
        let label = if k == 0 { "j_*O_E".to_string() } else { format!("j_*O_E({k})") };
        Ok(KClass { label, ch })
    }

    /// `dim H^{2k}(X̃) = dim H^{2k}(X) + Σ_{j=1}^{c-1} dim H^{2k-2j}(Z)` for every `k`.
    pub fn betti_bookkeeping(&self) -> (Vec<usize>, Vec<usize>) {
        let betti = |a: &GradedFrobeniusAlgebra, n: usize| -> Vec<usize> {
            (0..=n).map(|k| a.degrees.iter().filter(|&&d| d as usize == 2 * k).count()).collect()
        };
        let n = self.algebra().dim_complex as usize;
        let total = betti(self.algebra(), n);
        let base = betti(&self.base.algebra, n);
        let center = betti(&self.center.algebra, n);
        let expected = (0..=n).map(|k| base[k] + (1..self.codim as usize).filter(|&j| j <= k).map(|j| center[k - j]).sum::<usize>()).collect();
        (total, expected)
    }
}

/// Assemble the built-in blowup.
pub fn assemble_blowup(preset: BlowupPreset) -> Result<BlowupData> {
    match preset {
        BlowupPreset::F1 => Ok(f1()),
    }
}

fn f1() -> BlowupData {
    // basis 1, h, e, pt
    let labels = ["1", "h", "e", "pt"].map(String::from).to_vec();
    let mut cup = vec![vec![vec![Rat::zero(); 4]; 4]; 4];
    for i in 0..4 {
        cup[0][i][i] = Rat::one();
        cup[i][0][i] = Rat::one();
    }
    cup[1][1][3] = rint(1);
    cup[2][2][3] = rint(-1);
    let mut pairing = exact::zeros(4, 4);
    pairing[0][3] = rint(1);
    pairing[3][0] = rint(1);
    pairing[1][1] = rint(1);
    pairing[2][2] = rint(-1);
    let alg = GradedFrobeniusAlgebra::from_parts("F1", labels, vec![0, 2, 2, 4], 2, 0, 3, cup, pairing).expect("F1 data is well formed");
    // c1 = 3h - e, c2 = 4 pt, ch_2 = (c1² - 2 c2)/2 = 0
    let ch = vec![vec![rint(2), Rat::zero(), Rat::zero(), Rat::zero()], vec![Rat::zero(), rint(3), rint(-1), Rat::zero()], vec![Rat::zero(); 4]];
    let tangent = TangentData::new(Arc::new(alg), ch).expect("F1 tangent data is well formed");
    let base = TangentData::projective(2);
    // 1 ↦ 1, p ↦ h, p² ↦ pt
    let mut pullback = exact::zeros(4, 3);
    pullback[0][0] = rint(1);
    pullback[1][1] = rint(1);
    pullback[3][2] = rint(1);
    let base_basis = KBasis::line_bundles(&base.algebra, &[2]).expect("line bundles on P2");
    BlowupData {
        name: "F1 = Bl_pt P2".into(),
        base,
        center: TangentData::projective(0),
        codim: 2,
        tangent,
        pullback,
        exceptional: vec![Rat::zero(), Rat::zero(), rint(1), Rat::zero()],
        base_basis,
    }
}

/// Ordered, block-labelled classes on the blowup together with their exact Gram matrix.
#[derive(Clone, Debug, Serialize)]
pub struct BlockSystem {
    pub labels: Vec<String>,
    #[serde(skip)]
    pub classes: Vec<KClass>,
    pub blocks: Vec<Block>,
    pub gram: IntMatrix,
}

impl BlockSystem {
    pub fn new(data: &BlowupData, classes: Vec<KClass>, blocks: Vec<Block>) -> Result<Self> {
        let n = classes.len();
        let mut seen = vec![false; n];
        for b in &blocks {
            for &m in &b.members {
                if m >= n || std::mem::replace(&mut seen[m], true) {
                    return Err(Error::Domain(format!("block `{}` has an out-of-range or repeated member {m}", b.name)));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Domain("every class must belong to exactly one block".into()));
        }
        let basis = KBasis { elements: classes.clone() };
        let gram = euler_gram(&data.tangent, &basis)?;
        Ok(Self { labels: classes.iter().map(|c| c.label.clone()).collect(), classes, blocks, gram })
    }

    pub fn basis(&self) -> KBasis {
        KBasis { elements: self.classes.clone() }
    }

    /// The same system in a new order; `order[k]` is the old position of the new `k`-th class.
    pub fn reordered(&self, data: &BlowupData, order: &[usize]) -> Result<Self> {
        let mut inverse = vec![usize::MAX; self.classes.len()];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }
        let classes = order.iter().map(|&i| self.classes[i].clone()).collect();
        let blocks = self.blocks.iter().map(|b| Block { members: b.members.iter().map(|&m| inverse[m]).collect(), ..b.clone() }).collect();
        Self::new(data, classes, blocks)
    }

    pub fn mutation_system(&self, data: &BlowupData) -> Result<MutationSystem> {
        MutationSystem::from_basis(&data.tangent, &self.basis(), None)
    }
}

/// The Orlov basis `φ^*O, φ^*O(1), φ^*O(2), j_*O_E`.
pub fn orlov_sod(data: &BlowupData) -> Result<BlockSystem> {
    let mut classes: Vec<KClass> =
        data.base_basis.elements.iter().map(|v| KClass { label: format!("φ*{}", v.label), ch: data.pull_back(&v.ch) }).collect();
    let base_rank = classes.len();
    let mut blocks = vec![Block { name: "φ*K(X)".into(), kind: BlockKind::Pullback, members: (0..base_rank).collect() }];
    for k in 0..data.codim as i64 - 1 {
        let start = classes.len();
        // the centre is a point, so K(Z) has the single generator O_Z
        classes.push(data.exceptional_sheaf(k)?);
        blocks.push(Block { name: format!("K(Z)_{k}"), kind: BlockKind::Center { twist: k }, members: vec![start] });
    }
    BlockSystem::new(data, classes, blocks)
}

#[derive(Clone, Debug, Serialize)]
pub struct LatticeCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SodLatticeReport {
    pub space: String,
    pub labels: Vec<String>,
    pub gram: IntMatrix,
    pub determinant: String,
    pub checks: Vec<LatticeCheck>,
    pub passed: bool,
}

/// Unimodularity, the `χ`-isometry of the base inclusion, and one-directional vanishing
/// between blocks (`χ(later, earlier) = 0`), all in exact arithmetic.
pub fn check_sod_lattice(data: &BlowupData, system: &BlockSystem) -> Result<SodLatticeReport> {
    let g = &system.gram;
    let det = exact::int_det(g);
    let unimodular = det == 1.into() || det == (-1).into();
    let mut checks = vec![LatticeCheck { name: "unimodular".into(), passed: unimodular, detail: format!("det = {det}") }];

    let base_gram = euler_gram(&data.base, &data.base_basis)?;
    let pullback = system.blocks.iter().find(|b| b.kind == BlockKind::Pullback);
    let (iso, detail) = match pullback {
        Some(b) if b.members.len() == base_gram.len() => {
            // match block members to base classes through their Chern characters
            let pulled: Vec<Vec<Rat>> = data.base_basis.elements.iter().map(|v| data.pull_back(&v.ch)).collect();
            let positions: Option<Vec<usize>> = pulled.iter().map(|ch| b.members.iter().copied().find(|&m| system.classes[m].ch == *ch)).collect();
            match positions {
                Some(pos) => {
                    let sub: IntMatrix = pos.iter().map(|&i| pos.iter().map(|&j| g[i][j]).collect()).collect();
                    (sub == base_gram, format!("sub-Gram {sub:?} vs base Gram {base_gram:?}"))
                }
                None => (false, "the pullback block does not consist of the pulled-back base basis".into()),
            }
        }
        Some(b) => (false, format!("pullback block has {} classes, the base basis {}", b.members.len(), base_gram.len())),
        None => (false, "no pullback block".into()),
    };
    checks.push(LatticeCheck { name: "isometry".into(), passed: iso, detail });

    let block_of: Vec<usize> = {
        let mut v = vec![0; system.classes.len()];
        for (k, b) in system.blocks.iter().enumerate() {
            for &m in &b.members {
                v[m] = k;
            }
        }
        v
    };
    // blocks are ordered by the position of their first member
    let first = |k: usize| first_member(&system.blocks[k]);
    let mut offending = Vec::new();
    for (i, row) in g.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            let (bi, bj) = (block_of[i], block_of[j]);
            if bi != bj && first(bi) > first(bj) && x != 0 {
                offending.push(format!("χ({}, {}) = {x}", system.labels[i], system.labels[j]));
            }
        }
    }
    let ordered_inside = system.blocks.iter().all(|b| b.members.windows(2).all(|w| w[0] < w[1]))
        && system.blocks.iter().all(|b| {
            let lo = first_member(b);
            let hi = b.members.iter().copied().max().unwrap_or(0);
            b.members.len() == hi + 1 - lo
        });
    let semi = offending.is_empty() && ordered_inside;
    checks.push(LatticeCheck {
        name: "semiorthogonal".into(),
        passed: semi,
        detail: if semi {
            "χ(later block, earlier block) = 0".into()
        } else if !ordered_inside {
            "blocks are not contiguous in the basis order".into()
        } else {
            offending.join("; ")
        },
    });
    let passed = checks.iter().all(|c| c.passed);
    Ok(SodLatticeReport { space: data.name.clone(), labels: system.labels.clone(), gram: g.clone(), determinant: det.to_string(), checks, passed })
}

fn first_member(b: &Block) -> usize {
    b.members.iter().copied().min().unwrap_or(0)
}

/// Floating HRR values of every pair before rounding.
pub fn hrr_integrality(data: &BlowupData, system: &BlockSystem, ctx: &PrecisionContext) -> Vec<Vec<EulerValue>> {
    system.classes.iter().map(|v| system.classes.iter().map(|w| euler_pairing(&data.tangent, v, w, ctx)).collect()).collect()
}

/// `c₁²` integrated over the blowup.
pub fn c1_squared(data: &BlowupData) -> Rat {
    let alg = data.algebra();
    alg.integrate_exact(&alg.cup_exact(&data.tangent.c1, &data.tangent.c1))
}

/// `ch(j_*O_E)` through the Koszul resolution `0 → O(-E) → O → O_E → 0`.
pub fn koszul_exceptional(data: &BlowupData) -> Result<Vec<Rat>> {
    let alg = data.algebra();
    let minus_e: Vec<Rat> = data.exceptional.iter().map(|x| -x).collect();
    let ch = alg.exp_nilpotent_exact(&minus_e)?;
    Ok(alg.unit_class().iter().zip(&ch).map(|(a, b)| a - b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charclasses::todd_class;
    use crate::exact::rat;

    #[test]
    fn f1_ring_and_classes() {
        let d = assemble_blowup(BlowupPreset::F1).unwrap();
        assert!(d.algebra().validate().passed());
        assert_eq!(c1_squared(&d), rint(8));
        assert_eq!(d.algebra().integrate_exact(&todd_class(&d.tangent)), rint(1));
        let (total, expected) = d.betti_bookkeeping();
        assert_eq!(total, vec![1, 2, 1]);
        assert_eq!(total, expected);
    }

    #[test]
    fn exceptional_sheaf_by_grr_and_koszul() {
        let d = assemble_blowup(BlowupPreset::F1).unwrap();
        let o_e = d.exceptional_sheaf(0).unwrap();
        assert_eq!(o_e.ch, vec![Rat::zero(), Rat::zero(), rint(1), rat(1, 2)]);
        assert_eq!(o_e.ch, koszul_exceptional(&d).unwrap());
    }

    #[test]
    fn orlov_gram() {
        let d = assemble_blowup(BlowupPreset::F1).unwrap();
        let s = orlov_sod(&d).unwrap();
        assert_eq!(s.gram, vec![vec![1, 3, 6, 1], vec![0, 1, 3, 1], vec![0, 0, 1, 1], vec![0, 0, 0, 1]]);
        let r = check_sod_lattice(&d, &s).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(s.mutation_system(&d).unwrap().is_unimodular());
    }

    #[test]
    fn presets_parse() {
        assert_eq!("F1".parse::<BlowupPreset>().unwrap(), BlowupPreset::F1);
        assert!(matches!("Bl_line P3".parse::<BlowupPreset>(), Err(Error::Unsupported(_))));
    }
}
