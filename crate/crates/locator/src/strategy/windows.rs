//! Distance-window arithmetic for equal subdivisions.
//!
//! Probing a branch vertex reveals the robber's exact distance to his
//! nearest branch vertex via the result mod m. Probing a midpoint bounds
//! which thread he is in. Each classifier here encodes one case table of
//! the matching strategy; the strategy machine cross-checks every
//! classification against the tracked belief and aborts on a mismatch.

/// Distance to the nearest branch vertex implied by a branch-vertex probe
/// result: `min(d mod m, m - d mod m)`.
pub fn nearest_branch_from_residue(d: u32, m: u32) -> u32 {
    let r = d % m;
    r.min(m - r)
}

/// True iff `d` is congruent to `r` or `-r` mod `m`.
pub fn is_pm(d: u32, m: u32, r: u32) -> bool {
    let x = d % m;
    x == r % m || x == (m - r % m) % m
}

/// Bands of a midpoint probe on a thread of length `m`, assuming the
/// robber cannot currently be at a branch vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MidBand {
    /// Inside (or at the probe point of) the probed thread.
    OnThread,
    /// Inside a thread sharing an endpoint with the probed one; the
    /// distance to the near endpoint is `r - dist(mid, near_end)`.
    Adjacent,
    /// No endpoint shared with the probed thread.
    Elsewhere,
}

/// Classifies a midpoint probe result `r`. Returns `None` for values that
/// cannot occur when the robber is off the branch vertices.
pub fn midpoint_band(r: u32, m: u32) -> Option<MidBand> {
    if m % 2 == 1 {
        let t = (m - 1) / 2;
        if r <= t {
            Some(MidBand::OnThread)
        } else if r <= t + m {
            Some(MidBand::Adjacent)
        } else {
            Some(MidBand::Elsewhere)
        }
    } else {
        let h = m / 2;
        if r < h {
            Some(MidBand::OnThread)
        } else if r == h || r == h + m {
            None
        } else if r < h + m {
            Some(MidBand::Adjacent)
        } else {
            Some(MidBand::Elsewhere)
        }
    }
}

/// Off-midpoint disambiguation (odd `m` only): residues mod `m` seen when
/// the robber sits at distance `t + 2` from the reference branch vertex.
pub fn offmid_far_residues(m: u32) -> [u32; 3] {
    [0, 3, m - 3]
}

/// Residues mod `m` seen at distance `t - 2` from the reference vertex.
pub fn offmid_near_residues(m: u32) -> [u32; 4] {
    [1, 4, m - 1, m - 4]
}

/// Outcomes of the probe at distance 4 from `c` along `c..c'` used when
/// the robber may be within two steps of a branch vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dist4Class {
    /// Result `m+4` or `2m-4`: the robber is at an unmatched candidate.
    InZ,
    /// Result 4: at `c`.
    AtC,
    /// Result `m-4`: at `c'`.
    AtCPrime,
    /// Result in `{5,6,7, m+1,m+2,m+3}`: inside a thread leading to `c`.
    ThreadToC,
    /// Result in `{m-3,m-2,m-1, m+5,m+6,m+7, 2m-7,2m-6,2m-5}`: inside a
    /// thread leading to `c'`.
    ThreadToCPrime,
}

pub fn dist4_class(d: u32, m: u32) -> Option<Dist4Class> {
    if d == m + 4 || d == 2 * m - 4 {
        Some(Dist4Class::InZ)
    } else if d == 4 {
        Some(Dist4Class::AtC)
    } else if d == m - 4 {
        Some(Dist4Class::AtCPrime)
    } else if (5..=7).contains(&d) || (m + 1..=m + 3).contains(&d) {
        Some(Dist4Class::ThreadToC)
    } else if (m - 3..=m - 1).contains(&d)
        || (m + 5..=m + 7).contains(&d)
        || (2 * m - 7..=2 * m - 5).contains(&d)
    {
        Some(Dist4Class::ThreadToCPrime)
    } else {
        None
    }
}

/// Outcomes of the probe at distance 3 from `a` along `a..b'` used when
/// the robber may be within two steps of a branch vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dist3Class {
    /// Result 3: at `a`.
    AtA,
    /// Result `m-3`: at `b'`.
    AtBPrime,
    /// Result `m+3`: at an unmatched vertex.
    InX,
    /// Inside `a..b'`; the position is pinned exactly by the belief.
    InsideABPrime,
    /// Inside a thread between `a` and an unmatched vertex.
    TowardX,
}

pub fn dist3_class(d: u32, m: u32) -> Option<Dist3Class> {
    let inside: &[u32] = if m % 2 == 0 {
        &[1, 2, m - 5, m - 4]
    } else {
        &[0, 1, 2, m - 6, m - 5, m - 4]
    };
    let toward: &[u32] = if m % 2 == 0 {
        &[4, 5, m + 1, m + 2]
    } else {
        &[4, 5, 6, m, m + 1, m + 2]
    };
    if d == 3 {
        Some(Dist3Class::AtA)
    } else if d == m - 3 {
        Some(Dist3Class::AtBPrime)
    } else if d == m + 3 {
        Some(Dist3Class::InX)
    } else if inside.contains(&d) {
        Some(Dist3Class::InsideABPrime)
    } else if toward.contains(&d) {
        Some(Dist3Class::TowardX)
    } else {
        None
    }
}

/// Outcomes of the pair-splitting probe at distance 2 from `a` on `a..a'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairProbeClass {
    /// Result 1, 2, m-3 or m-2: position pinned (on `a..a'` or at an end).
    Won,
    /// Result 3: one step from `a` on a thread not leading to `a'`.
    OffANotAPrime,
    /// Result m-1: one step from `a'` on a thread not leading to `a`.
    OffAPrimeNotA,
    /// Result m+1: on a thread between an unmatched candidate and `a`.
    ThreadYToA,
    /// Result > m+1 and congruent to +-2 mod m: at an unmatched candidate.
    InY,
    /// Result > m+1, not +-2 mod m: one step from an unmatched candidate
    /// on a thread not leading to `a`.
    OffYNotA,
}

pub fn pair_probe_class(d: u32, m: u32) -> Option<PairProbeClass> {
    if d == 1 || d == 2 || d == m - 3 || d == m - 2 {
        Some(PairProbeClass::Won)
    } else if d == 3 {
        Some(PairProbeClass::OffANotAPrime)
    } else if d == m - 1 {
        Some(PairProbeClass::OffAPrimeNotA)
    } else if d == m + 1 {
        Some(PairProbeClass::ThreadYToA)
    } else if d > m + 1 && is_pm(d, m, 2) {
        Some(PairProbeClass::InY)
    } else if d > m + 1 {
        Some(PairProbeClass::OffYNotA)
    } else {
        None
    }
}

/// Outcomes of probing the branch vertex `a` at the start of the
/// many-candidate reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorProbeClass {
    /// Result 0: captured at `a`.
    Caught,
    /// A positive multiple of m: at a branch vertex other than `a`.
    AtOtherBranch,
    /// Result 1: adjacent to `a`.
    AdjacentToA,
    /// Result +-1 mod m, greater than 1: adjacent to another candidate.
    AdjacentToOther,
}

pub fn anchor_probe_class(d: u32, m: u32) -> Option<AnchorProbeClass> {
    if d == 0 {
        Some(AnchorProbeClass::Caught)
    } else if d % m == 0 {
        Some(AnchorProbeClass::AtOtherBranch)
    } else if d == 1 {
        Some(AnchorProbeClass::AdjacentToA)
    } else if is_pm(d, m, 1) {
        Some(AnchorProbeClass::AdjacentToOther)
    } else {
        None
    }
}

/// Outcomes of probing a neighbour of the unmatched candidate `y` (the
/// vertex one step along `y..a`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighbourProbeClass {
    /// Result 0 or 1: caught (at the probe or at `y`).
    Caught,
    /// Result 2: one step from `y` heading away from `a`.
    OffYAwayFromA,
    /// Result 2m-2: one step from another candidate, toward `a`.
    OffOtherTowardA,
    /// Result +-1 mod m, above 1: at another candidate.
    AtOther,
    /// Result 0 or +-2 mod m, above 2m-2: one step from another
    /// candidate on a thread not leading to `a`.
    OffOtherAwayFromA,
}

pub fn neighbour_probe_class(d: u32, m: u32) -> Option<NeighbourProbeClass> {
    if d <= 1 {
        Some(NeighbourProbeClass::Caught)
    } else if d == 2 {
        Some(NeighbourProbeClass::OffYAwayFromA)
    } else if d == 2 * m - 2 {
        Some(NeighbourProbeClass::OffOtherTowardA)
    } else if is_pm(d, m, 1) {
        Some(NeighbourProbeClass::AtOther)
    } else if d > 2 * m - 2 && (d % m == 0 || is_pm(d, m, 2)) {
        Some(NeighbourProbeClass::OffOtherAwayFromA)
    } else {
        None
    }
}
