#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "oracles.hpp"
#include "wow/data.hpp"

using namespace wow;

TEST_CASE("circle clouds sit on the circle", "[data]") {
  PointCloud c = gen_circle_cloud(3.0, -1.0, 0.5, 40, 7);
  REQUIRE(c.count() == 40);
  for (int j = 0; j < 40; ++j) {
    double r = std::hypot(c.coords(0, j) - 3.0, c.coords(1, j) + 1.0);
    CHECK(std::abs(r - 0.5) <= 1e-9);
  }
  PointCloud again = gen_circle_cloud(3.0, -1.0, 0.5, 40, 7);
  CHECK((c.coords - again.coords).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(gen_circle_cloud(0, 0, -1.0, 4, 0), InputError);
}

TEST_CASE("image_to_cloud stays in the hot pixel", "[data]") {
  Eigen::MatrixXd img = Eigen::MatrixXd::Zero(4, 4);
  img(1, 2) = 1.0;  // row 1, col 2
  PointCloud c = image_to_cloud(img, 50, 3);
  for (int j = 0; j < 50; ++j) {
    CHECK(c.coords(0, j) >= 0.5);
    CHECK(c.coords(0, j) <= 0.75);
    CHECK(c.coords(1, j) >= 0.5);   // rows 0..1 of 4 -> y in (0.5, 1]
    CHECK(c.coords(1, j) <= 0.75);
  }
}

TEST_CASE("image_to_cloud uniform image covers quadrants evenly", "[data]") {
  Eigen::MatrixXd img = Eigen::MatrixXd::Ones(8, 8);
  const int n = 100000;
  PointCloud c = image_to_cloud(img, n, 9);
  int q[4] = {0, 0, 0, 0};
  for (int j = 0; j < n; ++j) {
    CHECK(c.coords(0, j) >= 0.0);
    CHECK(c.coords(0, j) <= 1.0);
    CHECK(c.coords(1, j) >= 0.0);
    CHECK(c.coords(1, j) <= 1.0);
    int idx = (c.coords(0, j) < 0.5 ? 0 : 1) + (c.coords(1, j) < 0.5 ? 0 : 2);
    ++q[idx];
  }
  double p = 0.25;
  double sigma = std::sqrt(n * p * (1 - p));
  for (int k = 0; k < 4; ++k) CHECK(std::abs(q[k] - n * p) <= 3 * sigma);

  PointCloud again = image_to_cloud(img, 100, 9);
  PointCloud once_more = image_to_cloud(img, 100, 9);
  CHECK((again.coords - once_more.coords).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("image_to_cloud rejects a zero-mass image", "[data]") {
  CHECK_THROWS_AS(image_to_cloud(Eigen::MatrixXd::Zero(3, 3), 5, 0), InputError);
}

TEST_CASE("idx reader parses a hand-built file", "[data]") {
  // one 2x2 image with bytes (0, 255, 0, 255)
  std::string bytes;
  auto be = [&](std::uint32_t v) {
    for (int i = 3; i >= 0; --i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  be(0x00000803);
  be(1);
  be(2);
  be(2);
  bytes.push_back('\x00');
  bytes.push_back('\xff');
  bytes.push_back('\x00');
  bytes.push_back('\xff');
  std::vector<Eigen::MatrixXd> images = parse_idx_images(bytes);
  REQUIRE(images.size() == 1);
  CHECK(images[0](0, 0) == 0.0);
  CHECK(images[0](0, 1) == 1.0);
  CHECK(images[0](1, 0) == 0.0);
  CHECK(images[0](1, 1) == 1.0);
}

TEST_CASE("idx reader rejects corruption with offsets", "[data]") {
  std::string bytes;
  auto be = [&](std::uint32_t v) {
    for (int i = 3; i >= 0; --i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  be(0x00000801);  // wrong magic
  be(1);
  be(2);
  be(2);
  bytes.append(4, '\x00');
  try {
    parse_idx_images(bytes);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.byte_offset == 0);
    CHECK(std::string(e.what()).find("0x00000801") != std::string::npos);
  }

  std::string good;
  std::string* out = &good;
  auto be2 = [&](std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  be2(0x00000803);
  be2(2);
  be2(2);
  be2(2);
  good.append(5, '\x01');  // 8 bytes expected, 5 given
  try {
    parse_idx_images(good);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.byte_offset == 16);
    CHECK(std::string(e.what()).find("expected 8") != std::string::npos);
    CHECK(std::string(e.what()).find("found 5") != std::string::npos);
  }
}

TEST_CASE("idx writer round-trips through the reader", "[data]") {
  std::vector<Eigen::MatrixXd> images;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < 3; ++k) {
    Eigen::MatrixXd img(5, 4);
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 4; ++c) img(r, c) = unif(rng);
    images.push_back(img);
  }
  std::vector<Eigen::MatrixXd> back = parse_idx_images(serialize_idx_images(images));
  REQUIRE(back.size() == 3);
  for (int k = 0; k < 3; ++k)
    CHECK((back[static_cast<std::size_t>(k)] - images[static_cast<std::size_t>(k)])
              .cwiseAbs()
              .maxCoeff() <= 0.5 / 255.0 + 1e-12);
}

TEST_CASE("dataset container round-trips byte-identically", "[data]") {
  CloudDataset ds;
  ds.dim = 2;
  for (std::uint64_t k = 0; k < 3; ++k) ds.clouds.push_back(oracle::random_cloud(2, 4 + static_cast<int>(k), 50 + k));
  std::string bytes = serialize_dataset(ds);
  CloudDataset loaded = deserialize_dataset(bytes);
  CHECK(serialize_dataset(loaded) == bytes);
  CHECK(loaded.count() == 3);
  CHECK(loaded.clouds[2].count() == 6);

  auto path = std::filesystem::temp_directory_path() / "wow_ds_roundtrip.wowds";
  write_dataset(path.string(), ds);
  CloudDataset from_disk = read_dataset(path.string());
  CHECK(serialize_dataset(from_disk) == bytes);
  std::filesystem::remove(path);
}

TEST_CASE("empty dataset container is valid", "[data]") {
  CloudDataset ds;
  ds.dim = 2;
  CloudDataset back = deserialize_dataset(serialize_dataset(ds));
  CHECK(back.count() == 0);
}

TEST_CASE("alignment permutations round-trip exactly", "[data]") {
  CloudDataset ds;
  ds.dim = 1;
  ds.has_perms = true;
  for (std::uint64_t k = 0; k < 2; ++k) {
    ds.clouds.push_back(oracle::random_cloud(1, 4, 80 + k));
    ds.perms.push_back(Permutation{{3, 1, 0, 2}});
  }
  std::string bytes = serialize_dataset(ds);
  CloudDataset back = deserialize_dataset(bytes);
  REQUIRE(back.has_perms);
  CHECK(back.perms[0].map == std::vector<int>{3, 1, 0, 2});
  CHECK(serialize_dataset(back) == bytes);
}

TEST_CASE("dataset loader rejects corruption", "[data]") {
  CloudDataset ds;
  ds.dim = 2;
  ds.clouds.push_back(oracle::random_cloud(2, 3, 1));
  std::string bytes = serialize_dataset(ds);

  std::string bad = bytes;
  bad[1] = 'X';
  CHECK_THROWS_AS(deserialize_dataset(bad), FormatError);
  CHECK_THROWS_AS(deserialize_dataset(bytes.substr(0, bytes.size() - 3)), FormatError);
  CHECK_THROWS_AS(deserialize_dataset(bytes + "z"), FormatError);
}

TEST_CASE("pure noise moments", "[data]") {
  SourceSpec spec;
  spec.kind = SourceKind::pure_noise;
  spec.dim = 2;
  spec.sigma_min = 1.0;
  spec.sigma_max = 1.0;
  MetaBatch batch = draw_source(spec, 16, 600, 12);
  double sq = 0.0;
  long count = 0;
  for (const auto& c : batch.clouds) {
    sq += c.coords.array().square().sum();
    count += c.coords.size();
  }
  double var = sq / static_cast<double>(count);
  CHECK(var == Catch::Approx(1.0).epsilon(0.05));
}

TEST_CASE("pure noise sigma varies per cloud", "[data]") {
  SourceSpec spec;
  spec.kind = SourceKind::pure_noise;
  spec.dim = 2;
  spec.sigma_min = 0.05;
  spec.sigma_max = 2.0;
  MetaBatch batch = draw_source(spec, 64, 40, 9);
  std::vector<double> stds;
  for (const auto& c : batch.clouds)
    stds.push_back(std::sqrt(c.coords.array().square().sum() / c.coords.size()));
  double lo = *std::min_element(stds.begin(), stds.end());
  double hi = *std::max_element(stds.begin(), stds.end());
  CHECK(hi / lo > 2.0);
}

TEST_CASE("barycentric noise degenerates to the reference", "[data]") {
  auto ref = std::make_shared<ReferenceMeasure>();
  ref->cloud = oracle::random_cloud(2, 10, 90);
  SourceSpec spec;
  spec.kind = SourceKind::barycentric_noise;
  spec.dim = 2;
  spec.sigma_min = 0.0;
  spec.sigma_max = 0.0;
  spec.ref = ref;
  MetaBatch batch = draw_source(spec, 10, 3, 4);
  for (const auto& c : batch.clouds)
    CHECK((c.coords - ref->cloud.coords).cwiseAbs().maxCoeff() <= 1e-9);

  CHECK_THROWS_AS(draw_source(spec, 9, 1, 0), InputError);
}

TEST_CASE("barycentric noise clouds are pre-aligned to the reference", "[data]") {
  auto ref = std::make_shared<ReferenceMeasure>();
  ref->cloud = oracle::random_cloud(2, 12, 91);
  double gap = detail::min_pairwise_gap(ref->cloud);
  SourceSpec spec;
  spec.kind = SourceKind::barycentric_noise;
  spec.dim = 2;
  spec.sigma_min = 1e-3 * gap * 0.5;
  spec.sigma_max = 1e-3 * gap;
  spec.ref = ref;
  int hits = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    MetaBatch batch = draw_source(spec, 12, 1, 100 + trial);
    Permutation p = align_to_reference(batch.clouds.front(), *ref);
    if (p.map == Permutation::identity(12).map) ++hits;
  }
  CHECK(hits == 100);
}

TEST_CASE("empirical source draws dataset clouds", "[data]") {
  auto ds = std::make_shared<CloudDataset>();
  ds->dim = 2;
  for (std::uint64_t k = 0; k < 5; ++k) ds->clouds.push_back(oracle::random_cloud(2, 6, 700 + k));
  SourceSpec spec;
  spec.kind = SourceKind::empirical;
  spec.dim = 2;
  spec.dataset = ds;
  MetaBatch batch = draw_source(spec, 6, 20, 3);
  for (const auto& c : batch.clouds) {
    bool found = false;
    for (const auto& orig : ds->clouds)
      if ((c.coords - orig.coords).cwiseAbs().maxCoeff() == 0.0) found = true;
    CHECK(found);
  }
  // subsampling n < stored count keeps points from the stored cloud
  MetaBatch sub = draw_source(spec, 3, 4, 5);
  CHECK(sub.clouds.front().count() == 3);
}
