//! Beam selection and the four precoding schemes: beam aligning (phase shifter
//! network), single beam, multiple beams via multiple RF chains, and the fully
//! digital baseline.
//!
//! Every scheme produces a [`PrecoderPair`] with the baseband columns scaled so
//! that each user's transmit power `‖P_RF p_k‖²` equals `P_T / K`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::arrays::ArrayGeometry;
use crate::error::{Error, Result};
use crate::linalg::{norm, norm_sqr, CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Beam aligning: several beams per RF chain through phase shifters.
    Ba,
    /// One beam per user through one RF chain.
    Sb,
    /// One RF chain per selected beam.
    Mbmrf,
    /// Fully digital matched filter on the whole beamspace column.
    Ideal,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Ideal, Scheme::Mbmrf, Scheme::Ba, Scheme::Sb];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Ba => "ba",
            Scheme::Sb => "sb",
            Scheme::Mbmrf => "mbmrf",
            Scheme::Ideal => "ideal",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-user beam sets, pairwise disjoint. Each user's list keeps selection
/// order, so the first entry is the seed (strongest) beam.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeamAssignment {
    per_user: Vec<Vec<usize>>,
    global: BTreeSet<usize>,
}

impl BeamAssignment {
    pub fn new(per_user: Vec<Vec<usize>>) -> Result<Self> {
        let mut global = BTreeSet::new();
        for (k, beams) in per_user.iter().enumerate() {
            for &b in beams {
                if !global.insert(b) {
                    return Err(Error::Domain(format!("beam {b} claimed twice (user {k})")));
                }
            }
        }
        Ok(Self { per_user, global })
    }

    pub fn per_user(&self) -> &[Vec<usize>] {
        &self.per_user
    }

    pub fn user(&self, k: usize) -> &[usize] {
        &self.per_user[k]
    }

    pub fn global(&self) -> &BTreeSet<usize> {
        &self.global
    }

    /// `B_T = Σ_k |B_k|`.
    pub fn total_beams(&self) -> usize {
        self.global.len()
    }
}

/// Sparse analog precoder: each RF chain lists its `(beam, weight)` taps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfPrecoder {
    n: usize,
    chains: Vec<Vec<(usize, C64)>>,
}

impl RfPrecoder {
    pub fn new(n: usize, chains: Vec<Vec<(usize, C64)>>) -> Result<Self> {
        if chains.iter().flatten().any(|&(b, _)| b >= n) {
            return Err(Error::Dimension(format!("RF tap beyond {n} beams")));
        }
        Ok(Self { n, chains })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            chains: (0..n).map(|i| vec![(i, C64::new(1.0, 0.0))]).collect(),
        }
    }

    pub fn num_beams(&self) -> usize {
        self.n
    }

    pub fn num_chains(&self) -> usize {
        self.chains.len()
    }

    pub fn chain(&self, i: usize) -> &[(usize, C64)] {
        &self.chains[i]
    }

    /// `P_RF^H h`.
    pub fn adjoint_apply(&self, h: &[C64]) -> Vec<C64> {
        self.chains
            .iter()
            .map(|taps| taps.iter().map(|&(b, w)| w.conj() * h[b]).sum())
            .collect()
    }

    /// `P_RF x`.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        for (taps, &xi) in self.chains.iter().zip(x) {
            for &(b, w) in taps {
                out[b] += w * xi;
            }
        }
        out
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.n, self.chains.len());
        for (i, taps) in self.chains.iter().enumerate() {
            for &(b, w) in taps {
                m[(b, i)] = w;
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecoderPair {
    pub scheme: Scheme,
    pub rf: RfPrecoder,
    /// `N_RF × K` baseband precoder.
    pub bb: CMatrix,
    /// Absent for the fully digital baseline.
    pub assignment: Option<BeamAssignment>,
}

impl PrecoderPair {
    pub fn users(&self) -> usize {
        self.bb.cols()
    }

    /// `H̄ = P_RF^H H̊`, the `N_RF × K` RF-user equivalent channel.
    pub fn equivalent_channel(&self, hb: &CMatrix) -> Result<CMatrix> {
        if hb.rows() != self.rf.num_beams() || hb.cols() != self.users() {
            return Err(Error::Dimension(format!(
                "channel is {}x{}, precoder expects {}x{}",
                hb.rows(),
                hb.cols(),
                self.rf.num_beams(),
                self.users()
            )));
        }
        let cols: Vec<_> = hb.columns().map(|h| self.rf.adjoint_apply(h)).collect();
        Ok(CMatrix::from_columns(&cols))
    }

    /// Transmit power `‖P_RF p_k‖²` allotted to user `k`.
    pub fn user_power(&self, k: usize) -> f64 {
        norm_sqr(&self.rf.apply(self.bb.col(k)))
    }

    /// Number of beams feeding the RF front end (`N` for the digital baseline).
    pub fn total_beams(&self) -> usize {
        self.assignment
            .as_ref()
            .map_or(self.rf.num_beams(), BeamAssignment::total_beams)
    }

    /// Checks the scheme's hardware structure and the per-user power equality.
    pub fn check_constraints(&self, p_t: f64, rel_tol: f64) -> Result<()> {
        let k = self.users();
        let fail = |msg: String| Err(Error::Domain(format!("{} precoder: {msg}", self.scheme)));
        let mag_ok = |w: C64, want: f64| (w.norm() - want).abs() <= 1e-14 * want.max(1.0);
        match (self.scheme, &self.assignment) {
            (Scheme::Ideal, _) => {
                if self.rf != RfPrecoder::identity(self.rf.num_beams()) {
                    return fail("RF stage must be the identity".into());
                }
            }
            (_, None) => return fail("missing beam assignment".into()),
            (scheme, Some(a)) => {
                let expected_chains = if scheme == Scheme::Mbmrf { a.total_beams() } else { k };
                if self.rf.num_chains() != expected_chains || a.per_user().len() != k {
                    return fail(format!("{} RF chains for {k} users", self.rf.num_chains()));
                }
                let mut chain = 0;
                for beams in a.per_user() {
                    let amp = 1.0 / (beams.len() as f64).sqrt();
                    if scheme == Scheme::Mbmrf {
                        for &b in beams {
                            let taps = self.rf.chain(chain);
                            if taps.len() != 1 || taps[0].0 != b || !mag_ok(taps[0].1, amp) {
                                return fail(format!("chain {chain} is not a selection column"));
                            }
                            chain += 1;
                        }
                    } else {
                        let taps = self.rf.chain(chain);
                        let support: BTreeSet<usize> = taps.iter().map(|t| t.0).collect();
                        let want: BTreeSet<usize> = beams.iter().copied().collect();
                        if support != want || taps.len() != beams.len() {
                            return fail(format!("chain {chain} support differs from its beam set"));
                        }
                        if scheme == Scheme::Sb && (beams.len() != 1 || taps[0].1 != C64::new(1.0, 0.0)) {
                            return fail(format!("chain {chain} is not one-hot"));
                        }
                        if taps.iter().any(|&(_, w)| !mag_ok(w, amp)) {
                            return fail(format!("chain {chain} violates |p| = 1/sqrt(B)"));
                        }
                        chain += 1;
                    }
                }
            }
        }
        let target = p_t / k as f64;
        for u in 0..k {
            let p = self.user_power(u);
            if (p - target).abs() > rel_tol * target {
                return fail(format!("user {u} power {p} != {target}"));
            }
        }
        Ok(())
    }
}

/// When greedy extension of a user's beam set stops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Stop once the best candidate is at most `ε ×` the seed magnitude. The
    /// rejected candidate is not added.
    Threshold(f64),
    /// Select exactly this many beams (fewer only if candidates run out).
    FixedCount(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UserOrder {
    #[default]
    Ascending,
    /// Users with the strongest beamspace peak choose first.
    PeakPowerDescending,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionOptions {
    pub stop: StopRule,
    pub order: UserOrder,
    /// Extend over every unclaimed beam instead of adjacent beams only.
    pub multi_cluster: bool,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        Self {
            stop: StopRule::Threshold(0.25),
            order: UserOrder::Ascending,
            multi_cluster: false,
        }
    }
}

impl SelectionOptions {
    pub fn threshold(epsilon: f64) -> Self {
        Self {
            stop: StopRule::Threshold(epsilon),
            ..Self::default()
        }
    }

    pub fn fixed(count: usize) -> Self {
        Self {
            stop: StopRule::FixedCount(count),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.stop {
            StopRule::Threshold(e) if !(e > 0.0 && e < 1.0) => {
                Err(Error::Domain(format!("threshold {e} outside (0, 1)")))
            }
            StopRule::FixedCount(0) => Err(Error::Domain("fixed beam count must be positive".into())),
            _ => Ok(()),
        }
    }
}

/// Beams adjacent to `selected` (index difference at most one in every
/// dimension, wrapping modularly), excluding `selected` and `claimed`.
pub fn adjacency(geometry: &ArrayGeometry, selected: &BTreeSet<usize>, claimed: &BTreeSet<usize>) -> BTreeSet<usize> {
    let (n1, n2) = geometry.dims();
    let mut out = BTreeSet::new();
    for &b in selected {
        if geometry.is_planar() {
            let (a, e) = geometry.beam_coords(b);
            for da in [n1 - 1, 0, 1] {
                for de in [n2 - 1, 0, 1] {
                    out.insert(geometry.flat_index((a + da) % n1, (e + de) % n2));
                }
            }
        } else {
            out.insert((b + n1 - 1) % n1);
            out.insert((b + 1) % n1);
        }
    }
    out.retain(|b| !selected.contains(b) && !claimed.contains(b));
    out
}

/// Index of the largest score; ties go to the lowest index.
fn argmax(candidates: impl IntoIterator<Item = usize>, score: impl Fn(usize) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for m in candidates {
        let s = score(m);
        match best {
            Some((bm, bs)) if s < bs || (s == bs && m > bm) => {}
            _ => best = Some((m, s)),
        }
    }
    best.map(|(m, _)| m)
}

fn user_order(hb: &CMatrix, order: UserOrder) -> Vec<usize> {
    let mut users: Vec<usize> = (0..hb.cols()).collect();
    if order == UserOrder::PeakPowerDescending {
        let peak = |k: usize| hb.col(k).iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        users.sort_by(|&a, &b| peak(b).total_cmp(&peak(a)).then(a.cmp(&b)));
    }
    users
}

fn check_channel(hb: &CMatrix, geometry: &ArrayGeometry) -> Result<()> {
    if hb.rows() != geometry.num_elements() {
        return Err(Error::Dimension(format!(
            "channel has {} rows for a {}-element array",
            hb.rows(),
            geometry.num_elements()
        )));
    }
    if hb.cols() > hb.rows() {
        return Err(Error::Domain(format!("{} users exceed {} beams", hb.cols(), hb.rows())));
    }
    for (k, col) in hb.columns().enumerate() {
        if !(norm(col) > 0.0) {
            return Err(Error::Domain(format!("user {k} has a zero channel")));
        }
    }
    Ok(())
}

/// Greedy sequential selection shared by the magnitude and IUI-aware rules.
///
/// `score(k, m)` ranks beam `m` for user `k`; `keep(pos, k, m)` may veto a
/// candidate in addition to the stop rule.
fn greedy_select(
    hb: &CMatrix,
    geometry: &ArrayGeometry,
    opts: &SelectionOptions,
    score: impl Fn(usize, usize) -> f64,
    keep: impl Fn(usize, usize, usize) -> bool,
) -> Result<BeamAssignment> {
    check_channel(hb, geometry)?;
    opts.validate()?;
    let n = hb.rows();
    let mut claimed = BTreeSet::new();
    let mut per_user = vec![Vec::new(); hb.cols()];
    for (pos, k) in user_order(hb, opts.order).into_iter().enumerate() {
        let h = hb.col(k);
        let seed =
            argmax((0..n).filter(|m| !claimed.contains(m)), |m| score(k, m)).ok_or(Error::Infeasible { user: k })?;
        let seed_mag = h[seed].norm();
        let mut chosen = vec![seed];
        let mut selected = BTreeSet::from([seed]);
        loop {
            if let StopRule::FixedCount(c) = opts.stop {
                if chosen.len() >= c {
                    break;
                }
            }
            let candidates: Vec<usize> = if opts.multi_cluster {
                (0..n)
                    .filter(|m| !claimed.contains(m) && !selected.contains(m))
                    .collect()
            } else {
                adjacency(geometry, &selected, &claimed).into_iter().collect()
            };
            let Some(l) = argmax(candidates, |m| score(k, m)) else {
                break;
            };
            if let StopRule::Threshold(eps) = opts.stop {
                if h[l].norm() <= eps * seed_mag {
                    break;
                }
            }
            if !keep(pos, k, l) {
                break;
            }
            chosen.push(l);
            selected.insert(l);
        }
        claimed.extend(chosen.iter().copied());
        per_user[k] = chosen;
    }
    BeamAssignment::new(per_user)
}

/// Greedy adjacent-beam selection by beamspace magnitude.
pub fn select_beams(hb: &CMatrix, geometry: &ArrayGeometry, opts: &SelectionOptions) -> Result<BeamAssignment> {
    greedy_select(hb, geometry, opts, |k, m| hb[(m, k)].norm(), |_, _, _| true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IuiAwareOptions {
    pub selection: SelectionOptions,
    /// Noise power σ² in the signal-to-interference ratio.
    pub sigma2: f64,
    /// Candidates with `η < eta_min` end the user's selection.
    pub eta_min: f64,
    /// `eta_min` is multiplied by this factor for each later user (1 = constant).
    pub eta_min_decay: f64,
}

/// Selection ranked by `η_m = |h_k,m|² / (σ² + Σ_{i≠k} |h_i,m|²)`.
pub fn iui_aware_select(hb: &CMatrix, geometry: &ArrayGeometry, opts: &IuiAwareOptions) -> Result<BeamAssignment> {
    if !(opts.sigma2 > 0.0) {
        return Err(Error::Domain(format!(
            "noise power must be positive, got {}",
            opts.sigma2
        )));
    }
    if !(opts.eta_min >= 0.0) || !(opts.eta_min_decay > 0.0) {
        return Err(Error::Domain("eta_min must be nonnegative and decay positive".into()));
    }
    let beam_power: Vec<f64> = (0..hb.rows())
        .map(|m| (0..hb.cols()).map(|k| hb[(m, k)].norm_sqr()).sum())
        .collect();
    let eta = |k: usize, m: usize| {
        let own = hb[(m, k)].norm_sqr();
        own / (opts.sigma2 + (beam_power[m] - own).max(0.0))
    };
    greedy_select(hb, geometry, &opts.selection, eta, |pos, k, m| {
        eta(k, m) >= opts.eta_min * opts.eta_min_decay.powi(pos as i32)
    })
}

/// Analog weights that rotate every selected element of `hk` onto a common
/// phase: `p_l = (h_l/h_ref)/|h_l/h_ref| · p_ref` with `p_ref = (h_ref/|h_ref|)/√B`,
/// so `Σ_l p_l^* h_l = Σ_l |h_l| / √B`. Returns a length-`N` vector, zero off
/// `beams`.
pub fn rotation_phases(hk: &[C64], beams: &[usize], reference: usize) -> Result<Vec<C64>> {
    if !beams.contains(&reference) {
        return Err(Error::Domain(format!("reference beam {reference} is not selected")));
    }
    let h_ref = hk[reference];
    if h_ref.norm() == 0.0 {
        return Err(Error::DegenerateReference { beam: reference });
    }
    let amp = 1.0 / (beams.len() as f64).sqrt();
    let p_ref = C64::from_polar(amp, h_ref.arg());
    let mut p = vec![C64::new(0.0, 0.0); hk.len()];
    for &l in beams {
        let ratio = hk[l] / h_ref;
        p[l] = if ratio.norm() == 0.0 {
            p_ref
        } else {
            C64::from_polar(amp, p_ref.arg() + ratio.arg())
        };
    }
    Ok(p)
}

/// Matched-filter baseband `p_k = α_k h̄_k` with `α_k = √(P_T/K) / ‖P_RF h̄_k‖`.
fn matched_filter_baseband(hb: &CMatrix, rf: &RfPrecoder, p_t: f64) -> Result<CMatrix> {
    if !(p_t > 0.0) {
        return Err(Error::Domain(format!("transmit power must be positive, got {p_t}")));
    }
    let k = hb.cols();
    let per_user = (p_t / k as f64).sqrt();
    let cols = hb
        .columns()
        .enumerate()
        .map(|(u, h)| {
            let eq = rf.adjoint_apply(h);
            let radiated = norm(&rf.apply(&eq));
            if !(radiated > 0.0) {
                return Err(Error::Domain(format!("user {u} has a zero equivalent channel")));
            }
            let alpha = per_user / radiated;
            Ok(eq.into_iter().map(|z| z * alpha).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CMatrix::from_columns(&cols))
}

/// Beam-aligning precoder for a given assignment: one RF chain per user whose
/// phase shifters align the selected beam gains.
pub fn ba_from_assignment(hb: &CMatrix, assignment: BeamAssignment, p_t: f64) -> Result<PrecoderPair> {
    let chains = assignment
        .per_user()
        .iter()
        .enumerate()
        .map(|(k, beams)| {
            let p = rotation_phases(hb.col(k), beams, beams[0])?;
            Ok(beams.iter().map(|&b| (b, p[b])).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let rf = RfPrecoder::new(hb.rows(), chains)?;
    let bb = matched_filter_baseband(hb, &rf, p_t)?;
    Ok(PrecoderPair {
        scheme: Scheme::Ba,
        rf,
        bb,
        assignment: Some(assignment),
    })
}

/// Greedy selection followed by gain rotation and matched-filter baseband.
pub fn ba_precoder(hb: &CMatrix, geometry: &ArrayGeometry, p_t: f64, opts: &SelectionOptions) -> Result<PrecoderPair> {
    ba_from_assignment(hb, select_beams(hb, geometry, opts)?, p_t)
}

/// Each user takes its strongest unclaimed beam, in user order.
pub fn sb_precoder(hb: &CMatrix, p_t: f64) -> Result<PrecoderPair> {
    let n = hb.rows();
    let mut claimed = BTreeSet::new();
    let mut per_user = Vec::with_capacity(hb.cols());
    for (k, h) in hb.columns().enumerate() {
        let b =
            argmax((0..n).filter(|m| !claimed.contains(m)), |m| h[m].norm()).ok_or(Error::Infeasible { user: k })?;
        claimed.insert(b);
        per_user.push(vec![b]);
    }
    let chains = per_user.iter().map(|b| vec![(b[0], C64::new(1.0, 0.0))]).collect();
    let rf = RfPrecoder::new(n, chains)?;
    let bb = matched_filter_baseband(hb, &rf, p_t)?;
    Ok(PrecoderPair {
        scheme: Scheme::Sb,
        rf,
        bb,
        assignment: Some(BeamAssignment::new(per_user)?),
    })
}

/// One RF chain per selected beam (selection columns scaled by `1/√B_k`),
/// matched filter over all `B_T` chains.
pub fn mbmrf_from_assignment(hb: &CMatrix, assignment: BeamAssignment, p_t: f64) -> Result<PrecoderPair> {
    let chains = assignment
        .per_user()
        .iter()
        .flat_map(|beams| {
            let amp = C64::new(1.0 / (beams.len() as f64).sqrt(), 0.0);
            beams.iter().map(move |&b| vec![(b, amp)])
        })
        .collect();
    let rf = RfPrecoder::new(hb.rows(), chains)?;
    let bb = matched_filter_baseband(hb, &rf, p_t)?;
    Ok(PrecoderPair {
        scheme: Scheme::Mbmrf,
        rf,
        bb,
        assignment: Some(assignment),
    })
}

pub fn mbmrf_precoder(
    hb: &CMatrix,
    geometry: &ArrayGeometry,
    p_t: f64,
    opts: &SelectionOptions,
) -> Result<PrecoderPair> {
    mbmrf_from_assignment(hb, select_beams(hb, geometry, opts)?, p_t)
}

/// Fully digital matched filter on the complete beamspace channel.
pub fn ideal_precoder(hb: &CMatrix, p_t: f64) -> Result<PrecoderPair> {
    let rf = RfPrecoder::identity(hb.rows());
    let bb = matched_filter_baseband(hb, &rf, p_t)?;
    Ok(PrecoderPair {
        scheme: Scheme::Ideal,
        rf,
        bb,
        assignment: None,
    })
}
