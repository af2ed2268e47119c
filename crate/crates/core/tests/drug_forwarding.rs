mod common;

use common::*;
use drugsim_core::protocol::{
    Action, Destination, Drug, DrugParams, Gradient, MessageKind, MessageSizes, MetaData,
    NodeState, Protocol,
};
use drugsim_core::{EnergyModel, NodeId, Position, ProtocolKind, RunConfig};

#[test]
fn three_node_chain_hand_trace() {
    let run = run_scripted(
        fixture_config(ProtocolKind::Drug),
        chain(2),
        NodeId(0),
        &[(1.0, NodeId(2))],
    );

    let trace: Vec<(MessageKind, u32, String)> = run
        .records
        .iter()
        .filter(|r| r.meta.is_some())
        .map(|r| (r.kind, r.src.0, r.dst.to_string()))
        .collect();
    let expected = vec![
        (MessageKind::Adv, 2, "*".to_string()),
        (MessageKind::Ack, 1, "2".to_string()),
        (MessageKind::Data, 2, "1".to_string()),
        (MessageKind::Adv, 1, "*".to_string()),
        (MessageKind::Ack, 0, "1".to_string()),
        (MessageKind::Data, 1, "0".to_string()),
    ];
    assert_eq!(trace, expected);
    assert_eq!(count_kind(&run, MessageKind::Data), 2);

    let meta = MetaData::new(NodeId(2), 0);
    assert_eq!(run.delivered.len(), 1);
    assert_eq!(run.delivered[0].0, meta);
    // ADV, ACK window, one hop of latency, twice over.
    assert!(
        (run.delivered[0].1 - 1.12).abs() < 1e-12,
        "{}",
        run.delivered[0].1
    );
    assert_eq!(run.gradients, vec![Gradient(0), Gradient(1), Gradient(2)]);
}

#[test]
fn three_node_chain_energy_matches_hand_count() {
    let run = run_scripted(
        fixture_config(ProtocolKind::Drug),
        chain(2),
        NodeId(0),
        &[(1.0, NodeId(2))],
    );
    let m = EnergyModel::default();
    let sizes = MessageSizes::default();
    let c = sizes.control_bits as f64;
    let k = (sizes.data_bits + sizes.control_bits) as f64;
    let range = RunConfig::default().radio_range_m;

    let tx = |bits: f64, d: f64| m.tx_cost(bits, d).unwrap();
    let rx = |bits: f64| m.rx_cost(bits).unwrap();

    // Setup: sink (free), A and B each broadcast once; A hears the sink and
    // B, B hears A.
    let setup = 2.0 * tx(c, range) + 3.0 * rx(c);
    // Event: B ADV (A hears), A ACK (B hears), A ADV (B hears), sink ACK
    // (A hears), and the two DATA hops.
    let control = tx(c, range) + rx(c) + tx(c, SPACING) + rx(c) + tx(c, range) + rx(c) + rx(c);
    let data = m.multihop_total_energy(k, 2, SPACING).unwrap();

    let consumed = initial_total(&run) - final_total(&run);
    assert!(relative_error(consumed, setup + control + data) < 1e-12);
    assert!(relative_error(run.consumed_j, consumed) < 1e-12);
}

#[test]
fn chain_energy_equals_multihop_formula_without_control_cost() {
    for hops in [1, 2, 5, 10] {
        let mut config = fixture_config(ProtocolKind::Drug);
        config.sizes.control_bits = 0;
        let run = run_scripted(
            config,
            chain(hops),
            NodeId(0),
            &[(1.0, NodeId(hops as u32))],
        );
        let expected = EnergyModel::default()
            .multihop_total_energy(2000.0, hops as u32, SPACING)
            .unwrap();
        let consumed = initial_total(&run) - final_total(&run);
        assert!(relative_error(consumed, expected) < 1e-9, "hops={hops}");
        assert_eq!(run.delivered.len(), 1);
    }
}

#[test]
fn sink_does_not_advertise_after_delivery() {
    let run = run_scripted(
        fixture_config(ProtocolKind::Drug),
        chain(3),
        NodeId(0),
        &[(1.0, NodeId(3))],
    );
    assert!(!run
        .records
        .iter()
        .any(|r| r.src == NodeId(0) && r.kind == MessageKind::Adv && r.meta.is_some()));
    assert_eq!(run.delivered.len(), 1);
}

#[test]
fn dead_end_is_abandoned_after_retries() {
    // Sink and A are connected; B and C sit alone 1 km away.
    let positions = vec![
        Position::new(0.0, 0.0),
        Position::new(100.0, 0.0),
        Position::new(1000.0, 0.0),
        Position::new(1100.0, 0.0),
    ];
    let run = run_scripted(
        fixture_config(ProtocolKind::Drug),
        positions,
        NodeId(0),
        &[(1.0, NodeId(3))],
    );
    assert_eq!(run.abandoned, 1);
    assert!(run.delivered.is_empty());
    let advs = of_kind(&run, MessageKind::Adv);
    assert_eq!(advs.len(), 1 + 2, "first ADV plus max_retries re-ADVs");
    assert!(advs.iter().all(|r| r.src == NodeId(3)));
    assert_eq!(count_kind(&run, MessageKind::Data), 0);
}

#[test]
fn starved_relay_never_acks_and_event_is_dropped() {
    let params = DrugParams {
        sizes: MessageSizes::default(),
        participation_threshold: 0.05,
        ack_wait: 0.05,
        max_retries: 2,
    };
    let mut drug = Drug::new(params, 3);
    let mut b = NodeState::new(NodeId(2), Position::new(200.0, 0.0), 0.5, false);
    b.gradient = Gradient(2);
    let mut a = NodeState::new(NodeId(1), Position::new(100.0, 0.0), 0.5, false);
    a.gradient = Gradient(1);
    a.residual_energy = 0.049;

    let meta = MetaData::new(NodeId(2), 0);
    let mut actions = drug.on_event_sensed(&mut b, meta, 0.0);
    let mut abandoned = false;
    for round in 0..=params.max_retries {
        let adv = actions
            .iter()
            .find_map(|a| match a {
                Action::Send { message, .. } => Some(message.clone()),
                _ => None,
            })
            .unwrap_or_else(|| panic!("round {round}: no ADV in {actions:?}"));
        assert_eq!(adv.dst, Destination::Broadcast);
        assert!(drug.on_receive(&mut a, &adv, 0.01).is_empty());
        actions = drug.on_timer(&mut b, meta, 0.05 * f64::from(round + 1));
        if actions == vec![Action::Abandon(meta)] {
            abandoned = true;
        }
    }
    assert!(abandoned);
    assert_eq!(drug.pending_count(NodeId(2)), 0);
}

#[test]
fn originator_below_threshold_still_advertises() {
    let mut config = fixture_config(ProtocolKind::Drug);
    config.energy.participation_threshold = 0.4;
    config.energy.initial_energy = 0.5;
    let mut sim = drugsim_core::Simulation::with_deployment(config, chain(2), NodeId(0)).unwrap();
    sim.sense_at(1.0, NodeId(2)).unwrap();
    let run = sim.run().unwrap();
    assert_eq!(run.delivered.len(), 1);
}

#[test]
fn reinit_relabels_after_a_relay_dies() {
    // sink(0) - A(1) - B(2) on a line, with a detour sink - D(4) - C(3) - B
    // above it. E(5) sits below, hearing only A and B.
    let positions = vec![
        Position::new(0.0, 0.0),
        Position::new(100.0, 0.0),
        Position::new(200.0, 0.0),
        Position::new(200.0, 130.0),
        Position::new(80.0, 120.0),
        Position::new(150.0, -100.0),
    ];
    let mut config = fixture_config(ProtocolKind::Drug);
    config.duration_s = 30.0;
    config.energy.initial_energy = 0.02;
    config.energy.participation_threshold = 1e-9;
    // B and E both depend on A, so A carries twice their load and dies first.
    let events: Vec<(f64, NodeId)> = (1..=9)
        .map(|t| (f64::from(t), NodeId(if t % 2 == 0 { 2 } else { 5 })))
        .collect();

    let without = run_scripted(config.clone(), positions.clone(), NodeId(0), &events);
    config.reinit_period_s = Some(5.0);
    let with = run_scripted(config, positions, NodeId(0), &events);

    assert!(
        with.deaths.iter().any(|(id, _)| *id == NodeId(1)),
        "{:?}",
        with.deaths
    );
    assert_eq!(without.gradients[2], Gradient(2));
    assert_eq!(with.gradients[1], Gradient::INFINITY);
    assert_eq!(
        with.gradients[2],
        Gradient(3),
        "B now routes through C and D"
    );
    assert_eq!(with.gradients[5], Gradient(4));

    let mut setup_times: Vec<f64> = with
        .records
        .iter()
        .filter(|m| m.meta.is_none())
        .map(|m| m.time_s)
        .collect();
    setup_times.dedup();
    assert_eq!(setup_times, vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]);
    assert!(without
        .records
        .iter()
        .filter(|m| m.meta.is_none())
        .all(|m| m.time_s == 0.0));
}
