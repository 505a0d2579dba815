//! Conformer matching: adjust only the torsions of a force-field
//! optimized conformer to best match a generated conformer, using
//! bound-constrained differential evolution (rand/1/bin) over the
//! torsion vector. The residual superposed RMSD is the conformer RMSD.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec;
use crate::geom3d::{self, RigidTransform};
use crate::molgraph::{Molecule, Vec3};
use crate::motif::{find_rotatable_bonds, OFF_AXIS_TOLERANCE};

/// Differential evolution settings. Defaults: population 15 × torsion
/// count, F = 0.8, CR = 0.9, 200 generations with a 1e-4 Å plateau
/// window of 20.
#[derive(Debug, Clone)]
pub struct DeConfig {
    pub seed: u64,
    pub max_generations: usize,
    pub pop_factor: usize,
    pub weight: f64,
    pub crossover: f64,
    pub plateau_tol: f64,
    pub plateau_window: usize,
}

impl Default for DeConfig {
    fn default() -> DeConfig {
        DeConfig {
            seed: 7,
            max_generations: 200,
            pop_factor: 15,
            weight: 0.8,
            crossover: 0.9,
            plateau_tol: 1e-4,
            plateau_window: 20,
        }
    }
}

/// One matched conformer pair.
#[derive(Debug, Clone)]
pub struct ConformerMatch {
    /// Generated conformer C.
    pub reference: Molecule,
    /// Force-field optimized conformer C_ff (input, untouched).
    pub optimized: Molecule,
    /// Torsion-adjusted C_ff, rigidly aligned onto the reference.
    pub matched: Molecule,
    /// Superposed heavy-atom RMSD of matched vs reference (Å).
    pub conformer_rmsd: f64,
    /// Torsion solution, one entry per controllable rotatable bond.
    pub torsions: Vec<f64>,
}

/// A controllable torsion: rotatable bond plus measurement references.
/// Adjacent references make the coordinates independent: every other
/// bond's rotation leaves both hinge atoms of this dihedral on its
/// axis, so the measured value is untouched.
struct TorsionAxis {
    a: usize,
    b: usize,
    moving: Vec<usize>,
    ref_a: usize,
    ref_b: usize,
}

fn torsion_axes(mol: &Molecule) -> Vec<TorsionAxis> {
    let rotatable = find_rotatable_bonds(mol);
    let mut axes = Vec::new();
    for &bond_idx in &rotatable {
        let bond = mol.bonds()[bond_idx];
        let pa = mol.atom(bond.a).coord;
        let pb = mol.atom(bond.b).coord;
        let pick_ref = |endpoint: usize, other: usize| {
            let mut neighbors: Vec<usize> = mol
                .neighbors(endpoint)
                .iter()
                .map(|&(n, _)| n)
                .filter(|&n| n != other)
                .collect();
            neighbors.sort_unstable();
            neighbors
                .into_iter()
                .find(|&n| perp_distance(mol.atom(n).coord, pa, pb) > OFF_AXIS_TOLERANCE)
        };
        let (ref_a, ref_b) = match (pick_ref(bond.a, bond.b), pick_ref(bond.b, bond.a)) {
            (Some(ra), Some(rb)) => (ra, rb),
            // Axially degenerate junction (e.g. a triple-bond carbon):
            // no independent torsion coordinate.
            _ => continue,
        };
        let moving = side_of(mol, bond.b, bond_idx);
        axes.push(TorsionAxis {
            a: bond.a,
            b: bond.b,
            moving,
            ref_a,
            ref_b,
        });
    }
    axes
}

fn side_of(mol: &Molecule, start: usize, skip_bond: usize) -> Vec<usize> {
    let mut seen = vec![false; mol.atoms().len()];
    let mut stack = vec![start];
    seen[start] = true;
    let mut members = vec![start];
    while let Some(i) = stack.pop() {
        for &(j, bond) in mol.neighbors(i) {
            if bond == skip_bond || seen[j] {
                continue;
            }
            seen[j] = true;
            members.push(j);
            stack.push(j);
        }
    }
    members.retain(|&i| i != start);
    members
}

fn perp_distance(p: Vec3, line_a: Vec3, line_b: Vec3) -> f64 {
    let dir = line_b - line_a;
    let n = dir.norm();
    if n < 1e-12 {
        return (p - line_a).norm();
    }
    (p - line_a).cross(&(dir / n)).norm()
}

fn measure(coords: &[Vec3], axis: &TorsionAxis) -> Result<f64> {
    geom3d::dihedral(
        coords[axis.ref_a],
        coords[axis.a],
        coords[axis.b],
        coords[axis.ref_b],
    )
}

/// Apply torsion targets in order; piece-local references keep the
/// coordinates independent.
fn set_torsions(base: &[Vec3], axes: &[TorsionAxis], values: &[f64]) -> Result<Vec<Vec3>> {
    let mut coords = base.to_vec();
    for (axis, &target) in axes.iter().zip(values) {
        let current = measure(&coords, axis)?;
        coords = geom3d::rotate_about_bond(
            &coords,
            &axis.moving,
            (axis.a, axis.b),
            target - current,
        )?;
    }
    Ok(coords)
}

fn wrap_angle(v: f64) -> f64 {
    use std::f64::consts::PI;
    (v + PI).rem_euclid(2.0 * PI) - PI
}

/// Best rigid alignment of `p` onto `q`; falls back to a pure centroid
/// shift for degenerate geometries.
fn align_onto(p: &[Vec3], q: &[Vec3]) -> RigidTransform {
    if let Ok((transform, _)) = geom3d::kabsch(p, q) {
        return transform;
    }
    let pc = p.iter().sum::<Vec3>() / p.len() as f64;
    let qc = q.iter().sum::<Vec3>() / q.len() as f64;
    RigidTransform {
        rotation: nalgebra::Matrix3::identity(),
        translation: qc - pc,
    }
}

/// Conformer matching with default settings.
pub fn conformer_match(reference: &Molecule, optimized: &Molecule) -> Result<ConformerMatch> {
    conformer_match_with(reference, optimized, &DeConfig::default())
}

/// Differential evolution over the torsions of `optimized`, minimizing
/// the superposed RMSD to `reference`. With zero rotatable bonds this is
/// a single rigid superposition. The unmodified conformer seeds the
/// population, so the result never exceeds the rigid baseline.
pub fn conformer_match_with(
    reference: &Molecule,
    optimized: &Molecule,
    config: &DeConfig,
) -> Result<ConformerMatch> {
    if !reference.same_graph(optimized) {
        return Err(Error::Metric(format!(
            "conformer graphs differ ('{}' vs '{}')",
            reference.name(),
            optimized.name()
        )));
    }
    let ref_coords = reference.coords();
    let base = optimized.coords();
    let axes = torsion_axes(optimized);

    let objective = |coords: &[Vec3]| -> f64 {
        geom3d::rmsd(coords, &ref_coords, true).expect("same atom count")
    };

    let (solution, final_coords) = if axes.is_empty() {
        (Vec::new(), base.clone())
    } else {
        let start: Vec<f64> = axes
            .iter()
            .map(|axis| measure(&base, axis))
            .collect::<Result<_>>()?;
        let solution = differential_evolution(
            &start,
            |values| {
                set_torsions(&base, &axes, values)
                    .map(|coords| objective(&coords))
                    .unwrap_or(f64::INFINITY)
            },
            config,
        );
        let coords = set_torsions(&base, &axes, &solution)?;
        (solution, coords)
    };

    let transform = align_onto(&final_coords, &ref_coords);
    let aligned = transform.apply_all(&final_coords);
    let conformer_rmsd = geom3d::rmsd(&aligned, &ref_coords, false)?;

    let mut matched = optimized.clone();
    matched.set_coords(&aligned)?;
    matched.set_name(format!("{}:matched", optimized.name()));
    Ok(ConformerMatch {
        reference: reference.clone(),
        optimized: optimized.clone(),
        matched,
        conformer_rmsd,
        torsions: solution,
    })
}

/// rand/1/bin differential evolution on the torus [-π, π)^dim.
fn differential_evolution(
    start: &[f64],
    objective: impl Fn(&[f64]) -> f64,
    config: &DeConfig,
) -> Vec<f64> {
    use std::f64::consts::PI;
    let dim = start.len();
    let pop_size = (config.pop_factor * dim).max(5);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut population: Vec<Vec<f64>> = Vec::with_capacity(pop_size);
    population.push(start.to_vec());
    for _ in 1..pop_size {
        population.push((0..dim).map(|_| rng.random_range(-PI..PI)).collect());
    }
    let mut fitness: Vec<f64> = population.iter().map(|m| objective(m)).collect();

    let best_of = |fitness: &[f64]| {
        fitness
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    };
    let mut window_best = best_of(&fitness);
    let mut stagnant = 0;

    for _generation in 0..config.max_generations {
        for i in 0..pop_size {
            let (r1, r2, r3) = distinct_triplet(&mut rng, pop_size, i);
            let j_rand = rng.random_range(0..dim);
            let mut trial = population[i].clone();
            for j in 0..dim {
                if rng.random::<f64>() < config.crossover || j == j_rand {
                    trial[j] = wrap_angle(
                        population[r1][j]
                            + config.weight * (population[r2][j] - population[r3][j]),
                    );
                }
            }
            let trial_fitness = objective(&trial);
            if trial_fitness <= fitness[i] {
                population[i] = trial;
                fitness[i] = trial_fitness;
            }
        }
        stagnant += 1;
        let best = best_of(&fitness);
        if window_best - best > config.plateau_tol {
            window_best = best;
            stagnant = 0;
        } else if stagnant >= config.plateau_window {
            break;
        }
    }

    let best_idx = fitness
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.partial_cmp(b).expect("finite fitness"))
        .map(|(i, _)| i)
        .expect("population not empty");
    population.swap_remove(best_idx)
}

/// Three distinct member indices, all different from `skip`.
fn distinct_triplet(rng: &mut ChaCha8Rng, pop: usize, skip: usize) -> (usize, usize, usize) {
    let mut picked = [usize::MAX; 3];
    let mut filled = 0;
    while filled < 3 {
        let r = rng.random_range(0..pop);
        if r != skip && !picked[..filled].contains(&r) {
            picked[filled] = r;
            filled += 1;
        }
    }
    (picked[0], picked[1], picked[2])
}

/// Match a whole set pairwise (record order), deriving one seed per
/// molecule from the base seed.
pub fn conformer_match_set(
    generated: &[Molecule],
    optimized: &[Molecule],
    config: &DeConfig,
) -> Result<Vec<ConformerMatch>> {
    let jobs: Vec<(Molecule, Molecule, DeConfig)> = generated
        .iter()
        .zip(optimized)
        .enumerate()
        .map(|(i, (g, f))| {
            let mut cfg = config.clone();
            cfg.seed = config.seed.wrapping_add(i as u64);
            (g.clone(), f.clone(), cfg)
        })
        .collect();
    exec::map_collect(&jobs, |(g, f, cfg)| conformer_match_with(g, f, cfg))
        .into_iter()
        .collect()
}

/// Conformer-matched docking inputs: matched structures plus a manifest
/// of per-molecule conformer RMSDs.
#[derive(Debug, Clone)]
pub struct DockingPrep {
    pub matches: Vec<ConformerMatch>,
}

impl DockingPrep {
    pub fn matched_sdf(&self) -> Result<Vec<u8>> {
        let molecules: Vec<Molecule> = self.matches.iter().map(|m| m.matched.clone()).collect();
        crate::molgraph::write_sdf(&molecules)
    }

    pub fn manifest_tsv(&self) -> String {
        let mut out = String::from("index\tname\ttorsions\tconformer_rmsd\n");
        for (i, m) in self.matches.iter().enumerate() {
            out.push_str(&format!(
                "{i}\t{}\t{}\t{:.6}\n",
                m.reference.name(),
                m.torsions.len(),
                m.conformer_rmsd
            ));
        }
        out
    }
}

/// Run conformer matching over matched generated/optimized sets for
/// external docking.
pub fn prepare_docking_inputs(
    generated: &[Molecule],
    optimized: &[Molecule],
    config: &DeConfig,
) -> Result<DockingPrep> {
    if generated.len() != optimized.len() {
        return Err(Error::Metric(format!(
            "docking prep needs matched sets; got {} vs {}",
            generated.len(),
            optimized.len()
        )));
    }
    let offenders: Vec<usize> = generated
        .iter()
        .zip(optimized)
        .enumerate()
        .filter(|(_, (g, f))| !g.same_graph(f))
        .map(|(i, _)| i)
        .collect();
    if !offenders.is_empty() {
        return Err(Error::Metric(format!(
            "optimized records do not graph-match generated records at indices {offenders:?}"
        )));
    }
    Ok(DockingPrep {
        matches: conformer_match_set(generated, optimized, config)?,
    })
}
