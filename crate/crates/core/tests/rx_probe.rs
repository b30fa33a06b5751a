//! Dev probe for the receive chain internals.
//! `cargo test --test rx_probe -- --ignored --nocapture`

use mgm_core::allocation::MCS_TABLE;
use mgm_core::fec;
use mgm_core::phy::{
    apply_channel, build_frame, demap_llr, FrameConfig, Impairments, StreamPayload, StreamRole,
};
use mgm_core::precoding::{Mode, PrecoderSet};
use mgm_core::scenario::{ChannelTap, UserChannel};
use mgm_core::util::fft::fft;
use mgm_core::{Complex64, Group};

fn orthogonal_channels() -> Vec<UserChannel> {
    let mk = |group: Group, user: u8, axis: usize, scale: f64| {
        let mut gain = vec![Complex64::ZERO; 2];
        gain[axis] = Complex64::new(scale, 0.0);
        let taps = vec![ChannelTap { delay: 0, gain: gain.clone() }];
        let h: Vec<Vec<Complex64>> =
            (0..64).map(|_| gain.iter().map(|g| g.conj()).collect()).collect();
        UserChannel { group, user, h, taps }
    };
    vec![
        mk(Group::G1, 1, 0, 1.0),
        mk(Group::G1, 2, 0, 0.9),
        mk(Group::G2, 1, 1, 0.8),
        mk(Group::G2, 2, 1, 0.7),
    ]
}

#[test]
#[ignore]
fn probe_decode_path() {
    let cfg = FrameConfig::default();
    let chans = orthogonal_channels();
    let mut p = PrecoderSet::zeros(2, Mode::Rsma);
    let g = (0.9f64 / 2.0).sqrt();
    p.p_c = vec![Complex64::new(g, 0.0), Complex64::new(g, 0.0)];
    p.p_1 = vec![Complex64::new(0.02, 0.0), Complex64::ZERO];
    p.p_2 = vec![Complex64::ZERO, Complex64::new(0.02, 0.0)];

    let payloads = vec![
        StreamPayload::random(StreamRole::Common, 0, &cfg, 77).unwrap(),
        StreamPayload::random(StreamRole::Private(Group::G1), 0, &cfg, 77).unwrap(),
        StreamPayload::random(StreamRole::Private(Group::G2), 0, &cfg, 77).unwrap(),
    ];
    let frame = build_frame(&cfg, &p, &payloads, 0.2).unwrap();
    let obs = apply_channel(&frame, &chans, &cfg, 1e-12, 5, Impairments::default());

    let user = 0usize;
    let ser = &obs[user].stage2;
    let field = cfg.field_samples();
    let known = cfg.ltf_sequence();

    // Effective common channel.
    let off = field;
    let rep1 = fft(&ser[off + 2 * cfg.cp_len..off + 2 * cfg.cp_len + 64]);
    let rep2 = fft(&ser[off + 2 * cfg.cp_len + 64..off + field]);
    let e_c: Vec<Complex64> = (0..64)
        .map(|k| {
            if known[k] == Complex64::ZERO {
                Complex64::ZERO
            } else {
                ((rep1[k] + rep2[k]) / 2.0) / known[k]
            }
        })
        .collect();
    let truth = chans[user].effective_gain(1, &p.p_c);
    println!("e_c[bin 1] = {} truth = {truth}", e_c[1]);

    // First payload symbol: equalize and compare LLR signs against the
    // transmitted coded bits.
    let level = &MCS_TABLE[0];
    let code = fec::code_for_mcs(level, 48, 50).unwrap();
    let codeword = fec::encode(&code.spec, &payloads[0].bits).unwrap();
    let on_air = fec::rate_match(&code.spec, &codeword, code.coded_bits).unwrap();

    let start = 4 * field + cfg.symbol_samples();
    let bins = fft(&ser[start + cfg.cp_len..start + cfg.symbol_samples()]);
    let mut wrong = 0usize;
    let mut llr_head = Vec::new();
    for (j, &bin) in cfg.data_bins.iter().enumerate() {
        let eq = bins[bin] / e_c[bin];
        let mut llr = Vec::new();
        demap_llr(eq, 1, 1e-3, &mut llr).unwrap();
        if j < 4 {
            llr_head.push((eq, llr[0], on_air[j]));
        }
        let want = on_air[j];
        let got = if llr[0] < 0.0 { 1u8 } else { 0u8 };
        if want != got {
            wrong += 1;
        }
    }
    println!("first-symbol wrong hard bits: {wrong}/48");
    println!("head: {llr_head:?}");
    println!("tx point[0..4]: {:?}", &payloads[0].symbols[0..4]);
}
