//! Seeded generation of small random network models for bound-soundness
//! campaigns: one to three switches in a chain, a handful of stations and
//! streams, utilization kept safely below one everywhere.

use crate::net_model::{Link, NetworkModel, NodeId, Stream, SwitchSpec, TrafficEnvelope};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LINK_CAPS: [f64; 3] = [6.25e5, 1.25e6, 1.25e7];

/// Builds a random model that always passes validation. Deterministic in
/// the seed.
pub fn random_model(seed: u64) -> NetworkModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1));

    let n_switches = rng.gen_range(1..=3usize);
    let n_stations = rng.gen_range(2..=4usize);
    let switches: Vec<SwitchSpec> = (0..n_switches)
        .map(|i| SwitchSpec {
            id: NodeId::new(format!("sw{i}")),
            port_count: 4,
            backplane_capacity: None,
        })
        .collect();

    let mut links = Vec::new();
    let mut duplex = |a: NodeId, b: NodeId, cap: f64| {
        links.push(Link { from: a.clone(), to: b.clone(), capacity: cap });
        links.push(Link { from: b, to: a, capacity: cap });
    };
    // Chain the switches, then attach each station to one of them.
    for i in 1..n_switches {
        let cap = LINK_CAPS[rng.gen_range(0..LINK_CAPS.len())];
        duplex(NodeId::new(format!("sw{}", i - 1)), NodeId::new(format!("sw{i}")), cap);
    }
    let mut stations = Vec::new();
    let mut attached_to = Vec::new();
    for i in 0..n_stations {
        let station = NodeId::new(format!("st{i}"));
        let sw = rng.gen_range(0..n_switches);
        let cap = LINK_CAPS[rng.gen_range(0..LINK_CAPS.len())];
        duplex(station.clone(), NodeId::new(format!("sw{sw}")), cap);
        stations.push(station);
        attached_to.push(sw);
    }

    let n_streams = rng.gen_range(1..=5usize);
    let mut streams = Vec::new();
    for i in 0..n_streams {
        let src = rng.gen_range(0..n_stations);
        let mut dst = rng.gen_range(0..n_stations);
        if dst == src {
            dst = (dst + 1) % n_stations;
        }
        // Route along the switch chain between the attachment points.
        let (a, b) = (attached_to[src], attached_to[dst]);
        let route: Vec<NodeId> = if a <= b {
            (a..=b).map(|k| NodeId::new(format!("sw{k}"))).collect()
        } else {
            (b..=a).rev().map(|k| NodeId::new(format!("sw{k}"))).collect()
        };
        let max_frame_len = rng.gen_range(64.0..=1526.0_f64).round();
        let sigma = rng.gen_range(max_frame_len..=4.0 * max_frame_len).round();
        let rho = rng.gen_range(1e3..=3e5_f64).round();
        streams.push(Stream {
            id: format!("f{i}").as_str().into(),
            source: stations[src].clone(),
            destination: stations[dst].clone(),
            envelope0: TrafficEnvelope { sigma, rho },
            max_frame_len,
            route,
        });
    }

    let mut model = NetworkModel { stations, switches, links, streams };
    rescale_to_utilization(&mut model, 0.75);
    debug_assert!(model.validate().is_clean(), "synth model invalid: {}", model.validate());
    model
}

/// Scales every stream rate down so no directed link or switch backplane
/// exceeds the target utilization.
fn rescale_to_utilization(model: &mut NetworkModel, target: f64) {
    let mut worst: f64 = 0.0;
    {
        let mut bump = |load: f64, cap: f64| {
            if cap > 0.0 {
                worst = worst.max(load / cap);
            }
        };
        for l in &model.links {
            let load: f64 = model
                .streams
                .iter()
                .filter(|s| {
                    model
                        .path_nodes(s)
                        .windows(2)
                        .any(|p| p[0] == l.from && p[1] == l.to)
                })
                .map(|s| s.envelope0.rho)
                .sum();
            bump(load, l.capacity);
        }
        for sw in &model.switches {
            let load: f64 = model
                .streams
                .iter()
                .filter(|s| s.route.contains(&sw.id))
                .map(|s| s.envelope0.rho)
                .sum();
            bump(load, model.backplane_capacity(sw));
        }
    }
    if worst > target {
        let scale = target / worst;
        for s in &mut model.streams {
            s.envelope0.rho *= scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn models_validate_clean() {
        for seed in 0..50 {
            let model = random_model(seed);
            let report = model.validate();
            assert!(report.is_clean(), "seed {seed}: {report}");
            assert!(!model.streams.is_empty());
        }
    }

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(random_model(42), random_model(42));
        assert_ne!(random_model(42), random_model(43));
    }
}
