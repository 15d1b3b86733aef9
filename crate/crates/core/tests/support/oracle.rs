use windflex_core::dispatch::{FlexSpec, NodeStep, Scenario};

/// Straight-line reading of the dispatch rules, kept separate from the
/// library's stepper.
pub fn oracle(
    scenario: Scenario,
    p: &[[f64; 2]],
    d: &[[f64; 2]],
    f: &FlexSpec,
) -> Vec<[NodeStep; 2]> {
    let (line_on, stor_on, cross_on) = match scenario {
        Scenario::NoFlex => (false, false, false),
        Scenario::Trans => (true, false, false),
        Scenario::Stor => (false, true, false),
        Scenario::FullFlex => (true, true, true),
    };
    let h = f.step_hours;
    let mut b = [0.0f64; 2];
    let mut out = Vec::with_capacity(p.len());
    for t in 0..p.len() {
        let mut r = [p[t][0] - d[t][0], p[t][1] - d[t][1]];
        let mut imp = [0.0f64; 2];
        let mut exp = [0.0f64; 2];
        let mut ch = [0.0f64; 2];
        let mut dis = [0.0f64; 2];
        let mut used = 0.0f64;
        let ch_cap = |i: usize, b: &[f64; 2]| {
            let room = ((f.storage_mwh[i] - b[i]) / (f.eta_charge * h)).max(0.0);
            room.min(f.charge_mw[i])
        };
        let dis_cap = |i: usize, b: &[f64; 2]| (f.eta_discharge * b[i] / h).min(f.discharge_mw[i]);
        if line_on {
            for (a, z) in [(0, 1), (1, 0)] {
                if r[a] > 0.0 && r[z] < 0.0 {
                    let x = r[a].min(-r[z]).min(f.transmission_mw);
                    r[a] -= x;
                    r[z] += x;
                    exp[a] += x;
                    imp[z] += x;
                    used += x;
                }
            }
        }
        if stor_on {
            for i in 0..2 {
                if r[i] > 0.0 {
                    ch[i] = r[i].min(ch_cap(i, &b));
                    r[i] -= ch[i];
                } else if r[i] < 0.0 {
                    dis[i] = (-r[i]).min(dis_cap(i, &b));
                    r[i] += dis[i];
                }
            }
        }
        if cross_on {
            for (a, z) in [(0, 1), (1, 0)] {
                if r[a] > 0.0 && dis[z] == 0.0 && exp[z] == 0.0 {
                    let x = r[a]
                        .min(f.transmission_mw - used)
                        .min(ch_cap(z, &b) - ch[z]);
                    let x = shrink(
                        x,
                        &[
                            (ch[z], ch_cap(z, &b)),
                            (used, f.transmission_mw),
                            (imp[z], f.transmission_mw),
                        ],
                    );
                    if x > 0.0 {
                        r[a] -= x;
                        exp[a] += x;
                        imp[z] += x;
                        ch[z] += x;
                        used += x;
                    }
                }
            }
            for (a, z) in [(0, 1), (1, 0)] {
                if r[a] < 0.0 && ch[z] == 0.0 && imp[z] == 0.0 {
                    let x = (-r[a])
                        .min(f.transmission_mw - used)
                        .min(dis_cap(z, &b) - dis[z]);
                    let x = shrink(
                        x,
                        &[
                            (dis[z], dis_cap(z, &b)),
                            (used, f.transmission_mw),
                            (imp[a], f.transmission_mw),
                        ],
                    );
                    if x > 0.0 {
                        r[a] += x;
                        imp[a] += x;
                        exp[z] += x;
                        dis[z] += x;
                        used += x;
                    }
                }
            }
        }
        for i in 0..2 {
            if ch[i] != 0.0 || dis[i] != 0.0 {
                b[i] = (b[i] + f.eta_charge * ch[i] * h - dis[i] * h / f.eta_discharge)
                    .clamp(0.0, f.storage_mwh[i]);
            }
        }
        let node = |i: usize| NodeStep {
            production: p[t][i],
            demand: d[t][i],
            import: imp[i],
            export: exp[i],
            charge: ch[i],
            discharge: dis[i],
            storage_level: b[i],
            loss: r[i] * r[i],
        };
        out.push([node(0), node(1)]);
    }
    out
}

/// Largest float not above `x` keeping each `total + x` within its cap.
fn shrink(x: f64, limits: &[(f64, f64)]) -> f64 {
    let ok = |y: f64| limits.iter().all(|(t, c)| t + y <= *c);
    if x <= 0.0 || ok(x) {
        return x;
    }
    // bisect on the ordered bit patterns of nonnegative floats
    let mut good = 0u64;
    let mut bad = x.to_bits();
    while bad > good + 1 {
        let probe = (good + bad) / 2;
        if ok(f64::from_bits(probe)) {
            good = probe;
        } else {
            bad = probe;
        }
    }
    f64::from_bits(good)
}
