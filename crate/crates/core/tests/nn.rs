use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermopad::nn::{
    compare_gradients, gradient_check, sgd_momentum_step, weights, Gradients, Hyperparams, InputShape, LayerSpec,
    Network, Params,
};
use thermopad::{Error, Tensor};

fn fc(inputs: usize, outputs: usize) -> LayerSpec {
    LayerSpec::FullyConnected { inputs, outputs }
}

fn conv(cin: usize, cout: usize, kernel: usize, stride: usize, padding: usize) -> LayerSpec {
    LayerSpec::Conv2d {
        in_channels: cin,
        out_channels: cout,
        kernel,
        stride,
        padding,
    }
}

fn random_batch(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let n: usize = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn zero_all(net: &mut Network) {
    for p in net.params_mut().iter_mut().flatten() {
        p.weight.data_mut().fill(0.0);
        p.bias.data_mut().fill(0.0);
    }
}

fn small_cnn(seed: u64) -> Network {
    Network::new(
        InputShape::new(8, 8, 2),
        vec![
            conv(2, 3, 3, 1, 1),
            LayerSpec::Relu,
            LayerSpec::MaxPool2d { size: 2, stride: 2 },
            conv(3, 4, 3, 2, 0),
            LayerSpec::Relu,
            LayerSpec::Flatten,
            fc(4, 5),
            LayerSpec::Relu,
            fc(5, 3),
            LayerSpec::Softmax,
        ],
        seed,
    )
    .unwrap()
}

#[test]
fn zero_weight_classifier_is_uniform() {
    let mut net = Network::new(
        InputShape::new(2, 2, 1),
        vec![LayerSpec::Flatten, fc(4, 2), LayerSpec::Softmax],
        3,
    )
    .unwrap();
    zero_all(&mut net);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let batch = random_batch(&mut rng, &[5, 2, 2, 1]);
    let probs = net.forward(&batch).unwrap();
    assert!(probs.data().iter().all(|&p| p == 0.5));
    let loss = net.loss(&batch, &[0, 1, 0, 1, 1]).unwrap();
    assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
}

#[test]
fn confident_true_class_has_zero_loss() {
    let mut net = Network::new(
        InputShape::new(1, 1, 1),
        vec![LayerSpec::Flatten, fc(1, 2), LayerSpec::Softmax],
        0,
    )
    .unwrap();
    let p = net.params_mut()[1].as_mut().unwrap();
    p.weight.data_mut().copy_from_slice(&[0.0, 0.0]);
    p.bias.data_mut().copy_from_slice(&[1000.0, 0.0]);
    let batch = Tensor::filled(&[1, 1, 1, 1], 1.0);
    assert_eq!(net.loss(&batch, &[0]).unwrap(), 0.0);
}

#[test]
fn softmax_rows_sum_to_one_and_stay_open() {
    let net = small_cnn(9);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let probs = net.forward(&random_batch(&mut rng, &[7, 8, 8, 2])).unwrap();
    for i in 0..probs.rows() {
        let row = probs.row(i);
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(row.iter().all(|&p| p > 0.0 && p < 1.0));
    }
}

#[test]
fn identity_convolution_passes_the_image_through() {
    let mut net = Network::new(InputShape::new(5, 4, 1), vec![conv(1, 1, 1, 1, 0)], 0).unwrap();
    let p = net.params_mut()[0].as_mut().unwrap();
    p.weight.data_mut()[0] = 1.0;
    p.bias.data_mut()[0] = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let image = random_batch(&mut rng, &[1, 5, 4, 1]);
    let trace = net.forward_trace(&image).unwrap();
    assert_eq!(trace[0].data(), image.data());
}

#[test]
fn all_ones_kernel_sums_the_window() {
    let mut net = Network::new(InputShape::new(6, 6, 1), vec![conv(1, 1, 3, 1, 0)], 0).unwrap();
    let p = net.params_mut()[0].as_mut().unwrap();
    p.weight.data_mut().fill(1.0);
    p.bias.data_mut().fill(0.0);
    let out = net.forward_trace(&Tensor::filled(&[1, 6, 6, 1], 1.0)).unwrap();
    assert_eq!(out[0].shape(), &[1, 4, 4, 1]);
    assert!(out[0].data().iter().all(|&v| v == 9.0));
}

#[test]
fn shape_mismatch_names_both_shapes() {
    let net = small_cnn(0);
    match net.forward(&Tensor::zeros(&[1, 8, 8, 3])) {
        Err(Error::InputShape { expected, actual }) => {
            assert_eq!(expected, vec![1, 8, 8, 2]);
            assert_eq!(actual, vec![1, 8, 8, 3]);
        }
        other => panic!("expected an input-shape error, got {other:?}"),
    }
}

#[test]
fn out_of_range_label_is_rejected() {
    let net = small_cnn(0);
    let batch = Tensor::zeros(&[2, 8, 8, 2]);
    assert!(matches!(
        net.loss_and_gradients(&batch, &[0, 3]),
        Err(Error::Label { label: 3, .. })
    ));
}

fn param<'a>(n: &'a mut Network, layer: usize, bias: bool, i: usize) -> &'a mut f64 {
    let p = n.params_mut()[layer].as_mut().unwrap();
    if bias {
        &mut p.bias.data_mut()[i]
    } else {
        &mut p.weight.data_mut()[i]
    }
}

/// Central differences computed here, outside the library, by perturbing
/// one parameter at a time through the public API.
fn oracle_gradients(net: &Network, batch: &Tensor, labels: &[usize], eps: f64) -> Vec<Option<(Vec<f64>, Vec<f64>)>> {
    let mut probe = net.clone();
    (0..net.params().len())
        .map(|layer| {
            let p = net.params()[layer].as_ref()?;
            let mut diff = |bias: bool, len: usize| -> Vec<f64> {
                (0..len)
                    .map(|i| {
                        let orig = *param(&mut probe, layer, bias, i);
                        *param(&mut probe, layer, bias, i) = orig + eps;
                        let plus = probe.loss(batch, labels).unwrap();
                        *param(&mut probe, layer, bias, i) = orig - eps;
                        let minus = probe.loss(batch, labels).unwrap();
                        *param(&mut probe, layer, bias, i) = orig;
                        (plus - minus) / (2.0 * eps)
                    })
                    .collect()
            };
            Some((diff(false, p.weight.len()), diff(true, p.bias.len())))
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

#[test]
fn analytic_gradients_match_the_oracle() {
    for seed in 0..3 {
        let net = small_cnn(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let batch = random_batch(&mut rng, &[4, 8, 8, 2]);
        let labels = [0, 1, 2, 1];
        let (_, grads) = net.loss_and_gradients(&batch, &labels).unwrap();
        let oracle = oracle_gradients(&net, &batch, &labels, 1e-5);
        let mut worst: f64 = 0.0;
        for (g, o) in grads.layers.iter().zip(&oracle) {
            match (g, o) {
                (Some(g), Some((ow, ob))) => {
                    for (a, n) in g.weight.data().iter().zip(ow).chain(g.bias.data().iter().zip(ob)) {
                        worst = worst.max(rel(*a, *n));
                    }
                }
                (None, None) => {}
                _ => panic!("gradient slots differ from trainable layers"),
            }
        }
        assert!(worst < 1e-4, "seed {seed}: worst relative error {worst:e}");
        let reported = gradient_check(&net, &batch, &labels, 1e-5).unwrap();
        assert!(reported < 1e-4, "gradient_check reported {reported:e}");
    }
}

#[test]
fn sign_flipped_fully_connected_gradient_is_caught() {
    let net = small_cnn(5);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let batch = random_batch(&mut rng, &[4, 8, 8, 2]);
    let labels = [2, 0, 1, 0];
    let (_, mut grads) = net.loss_and_gradients(&batch, &labels).unwrap();
    let last_fc = 8;
    let g = grads.layers[last_fc].as_mut().unwrap();
    for v in g.weight.data_mut().iter_mut().chain(g.bias.data_mut()) {
        *v = -*v;
    }
    let err = compare_gradients(&net, &batch, &labels, 1e-5, &grads).unwrap();
    assert!(err > 0.1, "mutation went unnoticed: {err}");
}

#[test]
fn parameter_free_network_checks_to_zero() {
    let net = Network::new(
        InputShape::new(1, 1, 3),
        vec![LayerSpec::Flatten, LayerSpec::Softmax],
        0,
    )
    .unwrap();
    let batch = Tensor::new(vec![1, 1, 1, 3], vec![0.1, 0.2, 0.3]).unwrap();
    assert_eq!(net.num_parameters(), 0);
    assert_eq!(gradient_check(&net, &batch, &[1], 1e-5).unwrap(), 0.0);
}

#[test]
fn forward_is_pure() {
    let net = small_cnn(11);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let batch = random_batch(&mut rng, &[3, 8, 8, 2]);
    let a = net.forward(&batch).unwrap();
    let b = net.forward(&batch).unwrap();
    assert_eq!(a, b);
    // batching does not change a sample's scores
    let single = Tensor::new(vec![1, 8, 8, 2], batch.data()[..128].to_vec()).unwrap();
    assert_eq!(net.forward(&single).unwrap().row(0), a.row(0));
}

#[test]
fn velocity_starts_at_zero() {
    let net = small_cnn(1);
    for (p, v) in net.params().iter().zip(net.velocity()) {
        match (p, v) {
            (Some(p), Some(v)) => {
                assert_eq!(p.weight.shape(), v.weight.shape());
                assert_eq!(p.bias.shape(), v.bias.shape());
                assert!(v.weight.data().iter().chain(v.bias.data()).all(|&x| x == 0.0));
            }
            (None, None) => {}
            _ => panic!("velocity slots differ from parameter slots"),
        }
    }
}

#[test]
fn initialization_respects_fan_in_bound() {
    let net = small_cnn(2);
    for (spec, p) in net.layers().iter().zip(net.params()) {
        if let Some(p) = p {
            let bound = (6.0 / spec.fan_in() as f64).sqrt();
            assert!(p.weight.data().iter().all(|w| w.abs() <= bound));
            assert!(p.bias.data().iter().all(|&b| b == 0.0));
        }
    }
}

fn scalar_net() -> Network {
    Network::new(
        InputShape::new(1, 1, 1),
        vec![LayerSpec::Flatten, fc(1, 1), LayerSpec::Softmax],
        0,
    )
    .unwrap()
}

fn scalar_grads(g: f64) -> Gradients {
    Gradients {
        layers: vec![
            None,
            Some(Params {
                weight: Tensor::filled(&[1, 1], g),
                bias: Tensor::filled(&[1], 0.0),
            }),
            None,
        ],
    }
}

fn weight_of(net: &Network) -> (f64, f64) {
    (
        net.params()[1].as_ref().unwrap().weight.data()[0],
        net.velocity()[1].as_ref().unwrap().weight.data()[0],
    )
}

#[test]
fn momentum_step_examples() {
    let hp = Hyperparams {
        learning_rate: 0.1,
        momentum: 0.9,
        ..Hyperparams::default()
    };
    let mut net = scalar_net();
    net.params_mut()[1].as_mut().unwrap().weight.data_mut()[0] = 1.0;
    sgd_momentum_step(&mut net, &scalar_grads(0.5), &hp).unwrap();
    let (p, v) = weight_of(&net);
    assert_eq!(v, 0.5);
    assert!((p - 0.95).abs() < 1e-15);

    let mut net = scalar_net();
    net.params_mut()[1].as_mut().unwrap().weight.data_mut()[0] = 0.0;
    sgd_momentum_step(&mut net, &scalar_grads(1.0), &hp).unwrap();
    sgd_momentum_step(&mut net, &scalar_grads(1.0), &hp).unwrap();
    let (p, v) = weight_of(&net);
    assert!((v - 1.9).abs() < 1e-15);
    assert!((p + 0.29).abs() < 1e-15);
}

#[test]
fn zero_momentum_is_plain_descent() {
    let hp = Hyperparams {
        learning_rate: 0.25,
        momentum: 0.0,
        ..Hyperparams::default()
    };
    let mut net = scalar_net();
    net.params_mut()[1].as_mut().unwrap().weight.data_mut()[0] = 2.0;
    for _ in 0..3 {
        sgd_momentum_step(&mut net, &scalar_grads(-0.4), &hp).unwrap();
    }
    assert!((weight_of(&net).0 - 2.3).abs() < 1e-15);
}

#[test]
fn mismatched_gradients_are_rejected() {
    let mut net = scalar_net();
    let mut g = scalar_grads(1.0);
    g.layers[1].as_mut().unwrap().weight = Tensor::zeros(&[2, 1]);
    assert!(matches!(
        sgd_momentum_step(&mut net, &g, &Hyperparams::default()),
        Err(Error::GradientShape(_))
    ));
}

#[test]
fn two_layer_net_fits_a_separable_toy_set() {
    // 8 points in 2-D, class given by the sign of x + y
    let points = [
        (1.0, 0.5, 0),
        (0.8, 1.2, 0),
        (0.3, 0.9, 0),
        (1.5, -0.2, 0),
        (-1.0, -0.4, 1),
        (-0.6, -1.1, 1),
        (-0.2, -0.7, 1),
        (-1.4, 0.3, 1),
    ];
    let data: Vec<f64> = points.iter().flat_map(|&(x, y, _)| [x, y]).collect();
    let labels: Vec<usize> = points.iter().map(|p| p.2).collect();
    let batch = Tensor::new(vec![8, 1, 1, 2], data).unwrap();
    let mut net = Network::new(
        InputShape::new(1, 1, 2),
        vec![
            LayerSpec::Flatten,
            fc(2, 8),
            LayerSpec::Relu,
            fc(8, 2),
            LayerSpec::Softmax,
        ],
        7,
    )
    .unwrap();
    let hp = Hyperparams {
        learning_rate: 0.1,
        ..Hyperparams::default()
    };
    let mut loss = f64::INFINITY;
    for _ in 0..500 {
        let (l, g) = net.loss_and_gradients(&batch, &labels).unwrap();
        loss = l;
        if loss < 0.01 {
            break;
        }
        sgd_momentum_step(&mut net, &g, &hp).unwrap();
    }
    assert!(loss < 0.01, "loss stuck at {loss}");
}

#[test]
fn weight_file_round_trip() {
    let net = small_cnn(21);
    let bytes = weights::encode(&net);
    assert_eq!(&bytes[..8], b"THPADW01");
    let records = weights::decode(&bytes).unwrap();
    assert_eq!(records.len(), 2 * net.params().iter().flatten().count());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.thw");
    weights::save(&net, &path).unwrap();
    let mut other = small_cnn(22);
    assert_ne!(other.params(), net.params());
    let applied = weights::apply(&mut other, &weights::read(&path).unwrap(), &[]).unwrap();
    assert_eq!(applied, 4);
    assert_eq!(other.params(), net.params());
}

#[test]
fn weight_file_layout_is_little_endian() {
    let mut net = scalar_net();
    let p = net.params_mut()[1].as_mut().unwrap();
    p.weight.data_mut()[0] = 1.5;
    p.bias.data_mut()[0] = -2.0;
    let bytes = weights::encode(&net);
    let mut expected = b"THPADW01".to_vec();
    for (dims, value) in [(&[1u32, 1][..], 1.5f64), (&[1u32][..], -2.0)] {
        expected.extend(1u32.to_le_bytes());
        expected.extend((dims.len() as u32).to_le_bytes());
        for d in dims {
            expected.extend(d.to_le_bytes());
        }
        expected.extend(value.to_le_bytes());
    }
    assert_eq!(bytes, expected);
}

#[test]
fn corrupt_weight_files_are_rejected() {
    let bytes = weights::encode(&small_cnn(0));
    assert!(weights::decode(b"NOTMAGIC").is_err());
    assert!(weights::decode(&bytes[..bytes.len() - 3]).is_err());
    let mut wrong = small_cnn(0);
    let records = weights::decode(&weights::encode(&scalar_net())).unwrap();
    assert!(weights::apply(&mut wrong, &records, &[]).is_err());
}
