use evsite_core::image::ImageBuf;
use evsite_core::metrics::{mse, psnr, ssim, MetricsReport, Psnr, SsimMode};
use evsite_core::rng::XorShift64Star;

fn random_image(seed: u64, w: usize, h: usize) -> ImageBuf {
    let mut rng = XorShift64Star::new(seed);
    ImageBuf::new(w, h, 3, (0..w * h * 3).map(|_| rng.below(256) as u8).collect()).unwrap()
}

#[test]
fn identical_images() {
    let a = random_image(1, 32, 24);
    assert_eq!(psnr(&a, &a).unwrap(), Psnr::Infinite);
    assert_eq!(ssim(&a, &a, SsimMode::Global).unwrap(), 1.0);
    assert_eq!(ssim(&a, &a, SsimMode::Windowed).unwrap(), 1.0);
    assert_eq!(
        MetricsReport::compute(&a, &a).unwrap().to_json(),
        r#"{"psnr":"inf","ssim":1.0}"#
    );
}

#[test]
fn uniform_offset_psnr() {
    let a = ImageBuf::filled(16, 16, 3, 100).unwrap();
    let b = ImageBuf::filled(16, 16, 3, 116).unwrap();
    assert_eq!(mse(&a, &b).unwrap(), 256.0);
    let db = psnr(&a, &b).unwrap().db();
    assert!((db - 24.0482).abs() <= 1e-3, "{db}");
    assert_eq!(db, 10.0 * (255.0f64 * 255.0 / 256.0).log10());
}

#[test]
fn black_vs_white_global_ssim() {
    let a = ImageBuf::filled(8, 8, 1, 0).unwrap();
    let b = ImageBuf::filled(8, 8, 1, 255).unwrap();
    let s = ssim(&a, &b, SsimMode::Global).unwrap();
    assert!((s - 9.99896e-5).abs() <= 1e-9, "{s}");
}

#[test]
fn symmetric_and_bounded() {
    for seed in 0..5 {
        let a = random_image(seed, 20, 15);
        let b = random_image(seed + 100, 20, 15);
        for mode in [SsimMode::Global, SsimMode::Windowed] {
            let ab = ssim(&a, &b, mode).unwrap();
            assert_eq!(ab, ssim(&b, &a, mode).unwrap());
            assert!(ab < 1.0 && ab > -1.0);
        }
    }
}

#[test]
fn shape_mismatch_and_small_images() {
    let a = random_image(1, 10, 10);
    let b = random_image(2, 10, 11);
    assert!(matches!(mse(&a, &b), Err(evsite_core::Error::ShapeMismatch(_))));
    assert!(ssim(&a, &a, SsimMode::Windowed).is_err());
}
