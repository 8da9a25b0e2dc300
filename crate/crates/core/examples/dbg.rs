fn main() {
    let model = ncsbound::synth::random_model(7);
    println!("{model:#?}");
    let analysis = ncsbound::calculus::analyze(&model).unwrap();
    for sa in &analysis.streams {
        println!("stream {} end_to_end {:.6e} sigmas {:?}", sa.id, sa.end_to_end, sa.sigmas);
        for d in &sa.per_switch {
            println!("  sw {} mux {:.6e} (argmin {}) shared {:.6e} out {:.6e}",
                d.switch, d.mux.delay_bound, d.mux.argmin_k, d.shared_queue, d.output_queue);
        }
    }
    let (stats, traces) = ncsbound::des_oracle::simulate_trace(&model, ncsbound::des_oracle::Workload::Greedy, 0.2);
    for (id, st) in &stats.per_stream {
        println!("observed {} max {:.6e} mean {:.6e} frames {}", id, st.max_delay, st.mean_delay, st.frames);
    }
    let worst = traces.iter().max_by(|a, b| a.delay.total_cmp(&b.delay)).unwrap();
    println!("worst frame: {:?}", worst);
}
