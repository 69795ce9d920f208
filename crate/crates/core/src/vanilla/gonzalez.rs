use super::{farthest_point_fill, with_k, SolverId, VanillaSolution};
use crate::error::Result;
use crate::instance::{Assignment, ClusteringInstance};
use crate::rng::{stream_rng, uniform_index, STREAM_GONZALEZ};

/// Farthest-point traversal (Gonzalez). The first center is drawn by `seed`
/// among facilities that coincide with clients, or is facility 0 when there
/// are none. A 2-approximation for k-center when `F = C`.
pub fn gonzalez_k_center(
    instance: &ClusteringInstance,
    k: usize,
    seed: u64,
) -> Result<VanillaSolution> {
    let on_clients = instance.facilities_on_clients();
    let start = if on_clients.is_empty() {
        0
    } else {
        let mut rng = stream_rng(seed, STREAM_GONZALEZ);
        on_clients[uniform_index(&mut rng, on_clients.len())]
    };
    let assignment = gonzalez_from(instance, k, start)?;
    Ok(VanillaSolution {
        assignment,
        solver: SolverId::KCenterGonzalez,
        seed,
    })
}

/// Farthest-point traversal from a fixed first facility.
pub fn gonzalez_from(instance: &ClusteringInstance, k: usize, start: usize) -> Result<Assignment> {
    let inst = with_k(instance, k)?;
    if start >= inst.num_facilities() {
        return Err(crate::error::Error::Domain(format!(
            "start facility {start} does not exist"
        )));
    }
    let mut opened = vec![start];
    farthest_point_fill(&inst, &mut opened, k);
    Assignment::nearest(&inst, opened)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Group, Norm};

    fn line(xs: &[f64], k: usize) -> ClusteringInstance {
        let pts: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        ClusteringInstance::from_points(&pts, vec![Group::new("all", 0..xs.len())], k, Norm::CENTER)
            .unwrap()
    }

    #[test]
    fn collinear_example() {
        let inst = line(&[0.0, 1.0, 10.0], 2);
        let a = gonzalez_from(&inst, 2, 0).unwrap();
        assert_eq!(a.opened(), &[0, 2]);
        assert_eq!(a.cost(), 1.0);
    }

    #[test]
    fn k_equals_n_costs_nothing() {
        let inst = line(&[0.0, 3.0, 4.0, 9.0], 4);
        let sol = gonzalez_k_center(&inst, 4, 11).unwrap();
        assert_eq!(sol.cost(), 0.0);
        assert_eq!(sol.opened().len(), 4);
    }

    #[test]
    fn k_above_facility_count_is_domain_error() {
        let inst = line(&[0.0, 1.0], 1);
        assert!(gonzalez_k_center(&inst, 3, 0).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let inst = line(&[0.0, 1.5, 2.0, 7.0, 8.5, 20.0], 3);
        let a = gonzalez_k_center(&inst, 3, 99).unwrap();
        let b = gonzalez_k_center(&inst, 3, 99).unwrap();
        assert_eq!(a, b);
    }
}
