//! The four generators side by side: size, edges, density and degree spread,
//! plus an edge-list round trip.
//!
//! cargo run --example generate_network -- [n] [seed]

use anyhow::Result;
use netlock::netgen::{
    density, format_edge_list, generate_random, generate_ring_lattice, generate_scale_free,
    generate_small_world, header_agent_count, parse_edge_list, Network, RngSeed,
};

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(1000), |s| s.parse())?;
    let seed = RngSeed(args.get(1).map_or(Ok(7), |s| s.parse())?);

    let nets: [(&str, Network); 4] = [
        ("ring lattice", generate_ring_lattice(n, 2)?),
        ("small world", generate_small_world(n, 4, 0.1, seed)?),
        ("random", generate_random(n, n, seed)?),
        ("scale free", generate_scale_free(n, 1, seed)?),
    ];
    println!(
        "{:<13} {:>6} {:>6} {:>10} {:>5} {:>5}",
        "network", "n", "edges", "density", "min", "max"
    );
    for (name, net) in &nets {
        let degrees: Vec<usize> = (0..net.n()).map(|i| net.degree(i)).collect();
        println!(
            "{name:<13} {:>6} {:>6} {:>10.6} {:>5} {:>5}",
            net.n(),
            net.edge_count(),
            density(net)?,
            degrees.iter().min().unwrap(),
            degrees.iter().max().unwrap()
        );
    }

    let text = format_edge_list(&nets[1].1);
    let back = parse_edge_list(&text, header_agent_count(&text))?;
    assert_eq!(back, nets[1].1);
    println!(
        "small world survives an edge-list round trip ({} lines)",
        text.lines().count()
    );
    Ok(())
}
