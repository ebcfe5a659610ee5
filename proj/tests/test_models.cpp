#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kws/models.hpp"
#include "testutil.hpp"

using namespace kws;

namespace {

Tensor<float> random_batch(int n, int h, int w, uint64_t seed) {
  Rng rng(seed);
  Tensor<float> t({n, h, w, 1});
  for (float& v : t.data) v = static_cast<float>(rng.uniform(0.0, 1.0));
  return t;
}

}  // namespace

TEST_CASE("mnist cnn parameter count is exactly 3,276,684") {
  const ModelSpec spec = mnist_cnn_spec();
  CHECK(count_params(spec) == 3276684);  // 832 + 51264 + 3212288 + 12300
  Network<float> net(spec);
  CHECK(net.parameter_count() == 3276684);
}

TEST_CASE("low-latency parameter count on the 40x98 feature geometry") {
  const ModelSpec spec = low_latency_spec(40, 98);
  // conv 7x7x1x3+3 = 150; flatten ceil(40/3)*ceil(98/3)*3 = 14*33*3 = 1386;
  // bottleneck 1386*42+42; dense 42*100+100; logits 100*12+12
  CHECK(count_params(spec) == 63916);
  Network<float> net(spec);
  CHECK(net.parameter_count() == 63916);
  // within 10% of the 63.8k reference point
  CHECK(std::abs(63916.0 / 63800.0 - 1.0) < 0.10);
}

TEST_CASE("count_params equals the allocated total for every variant") {
  const std::vector<ModelSpec> specs = {
      low_latency_spec(40, 98),     low_latency_spec(28, 28),
      mnist_cnn_spec(),             shallow_crm_spec(28, 28),
      shallow_crm_spec(100, 100),   deep_crm_spec(28, 28),
      deep_crm_spec(40, 98),        shallow_crm_spec(32, 32, {8, 16, 32}, Activation::Elu),
  };
  for (const ModelSpec& spec : specs) {
    Network<float> net(spec);
    CHECK(net.parameter_count() == count_params(spec));
  }
}

TEST_CASE("count_params ignores batch size and counts a dense toy exactly") {
  // single dense layer m=10, n=5 inside a low-latency skeleton is awkward;
  // check the closed-form helper arithmetic through a tiny CRM dense stage
  ModelSpec spec = shallow_crm_spec(8, 8, {1, 1, 1});
  spec.crm_dense = 5;
  spec.num_classes = 2;
  // convs: 9*1*1+1, 9*1*1+1, 9*1*1+1 = 30; flatten 1*1*1 = 1
  // dense 1*5+5 = 10; logits 5*2+2 = 12
  CHECK(count_params(spec) == 52);
  Network<float> net(spec);
  CHECK(net.parameter_count() == 52);
}

TEST_CASE("forward produces [batch, 12] logits with sane softmax") {
  const std::vector<ModelSpec> specs = {low_latency_spec(40, 98), mnist_cnn_spec(),
                                        shallow_crm_spec(28, 28), deep_crm_spec(28, 28)};
  for (const ModelSpec& spec : specs) {
    Network<float> net(spec);
    initialize_network(net, InitSpec{InitKind::Xavier, 0.01, 17});
    const Tensor<float> batch = random_batch(4, spec.input_height, spec.input_width, 3);
    const Tensor<float> logits = net.logits(batch);
    REQUIRE(logits.shape == std::vector<int>{4, 12});
    const Tensor<float> probs = softmax_rows(logits);
    for (int i = 0; i < 4; ++i) {
      double row = 0.0;
      for (int j = 0; j < 12; ++j) row += probs.data[static_cast<size_t>(i) * 12 + j];
      CHECK(std::abs(row - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("mnist variant rejects non-28x28 input") {
  ModelSpec spec = mnist_cnn_spec();
  spec.input_height = 100;
  spec.input_width = 100;
  CHECK_THROWS_AS(Network<float>{spec}, ShapeError);
}

TEST_CASE("crm spatial traces") {
  SUBCASE("shallow on 28: 28 -> 14 -> 7 -> 4") {
    ModelSpec spec = shallow_crm_spec(28, 28, {1, 1, 7});
    // flatten should be 4*4*7
    Network<float> net(spec);
    bool found = false;
    for (const auto& p : net.params())
      if (p.name == "dense1/w") {
        CHECK(p.value.shape[0] == 4 * 4 * 7);
        found = true;
      }
    CHECK(found);
  }
  SUBCASE("deep on 28: trace ends at 1x1") {
    ModelSpec spec = deep_crm_spec(28, 28, {1, 1, 1, 1, 9});
    Network<float> net(spec);
    for (const auto& p : net.params())
      if (p.name == "dense1/w") CHECK(p.value.shape[0] == 9);
  }
  SUBCASE("a sixth halving from 1x1 errors") {
    ModelSpec spec = deep_crm_spec(2, 2);  // 2->1 after block 1, block 2 must fail
    CHECK_THROWS_AS(Network<float>{spec}, ShapeError);
  }
  SUBCASE("activation choice changes no shapes") {
    for (const Activation a :
         {Activation::Relu, Activation::Elu, Activation::Sigmoid, Activation::Tanh}) {
      Network<float> net(shallow_crm_spec(28, 28, {16, 32, 64}, a));
      CHECK(net.parameter_count() == count_params(shallow_crm_spec(28, 28, {16, 32, 64}, a)));
    }
  }
}

TEST_CASE("low-latency input smaller than the filter errors") {
  CHECK_THROWS_AS(Network<float>(low_latency_spec(5, 5)), ShapeError);
}

TEST_CASE("deterministic construction and initialization") {
  const ModelSpec spec = low_latency_spec(40, 98);
  Network<float> a(spec), b(spec);
  initialize_network(a, InitSpec{InitKind::Xavier, 0.01, 9});
  initialize_network(b, InitSpec{InitKind::Xavier, 0.01, 9});
  REQUIRE(a.params().size() == b.params().size());
  for (size_t i = 0; i < a.params().size(); ++i)
    CHECK(a.params()[i].value.data == b.params()[i].value.data);
  // biases are zero under both schemes
  Network<float> c(spec);
  initialize_network(c, InitSpec{InitKind::TruncatedNormal, 0.01, 9});
  for (const auto& p : c.params())
    if (p.value.shape.size() == 1)
      for (const float v : p.value.data) CHECK(v == 0.0f);
}

TEST_CASE("dropout is disabled at inference") {
  ModelSpec spec = mnist_cnn_spec();
  spec.keep_prob = 0.5;
  Network<float> net(spec);
  initialize_network(net, InitSpec{InitKind::Xavier, 0.01, 4});
  const Tensor<float> batch = random_batch(2, 28, 28, 8);
  const Tensor<float> a = net.logits(batch);
  const Tensor<float> b = net.logits(batch);
  CHECK(a.data == b.data);  // bit-exact across repeated eval passes
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  const auto dir = test::scratch_dir("ckpt");
  ModelSpec spec = shallow_crm_spec(28, 28, {4, 8, 8});
  Network<float> net(spec);
  initialize_network(net, InitSpec{InitKind::Xavier, 0.01, 21});
  const Tensor<float> batch = random_batch(3, 28, 28, 5);
  const Tensor<float> before = net.logits(batch);

  const auto path = dir / "model.ckpt";
  save_checkpoint(net, path, 21, 7);

  SUBCASE("load reproduces forward outputs bit-exactly") {
    LoadedCheckpoint loaded = load_checkpoint(path);
    CHECK(loaded.info.seed == 21);
    CHECK(loaded.info.epoch == 7);
    const Tensor<float> after = loaded.network.logits(batch);
    CHECK(after.data == before.data);
  }
  SUBCASE("restore into a matching network") {
    Network<float> other(spec);
    restore_checkpoint(other, path);
    CHECK(other.logits(batch).data == before.data);
  }
  SUBCASE("restore into a different spec is an incompatibility error") {
    Network<float> other(low_latency_spec(40, 98));
    CHECK_THROWS_AS(restore_checkpoint(other, path), ConfigError);
  }
  SUBCASE("truncated checkpoint is a format error, not a crash") {
    auto bytes = test::read_bytes(path);
    bytes.resize(bytes.size() * 2 / 3);
    std::ofstream(dir / "trunc.ckpt", std::ios::binary)
        .write(reinterpret_cast<const char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()));
    CHECK_THROWS_AS(load_checkpoint(dir / "trunc.ckpt"), FormatError);
  }
  SUBCASE("garbage file is a format error") {
    std::ofstream(dir / "junk.ckpt", std::ios::binary) << "garbage";
    CHECK_THROWS_AS(load_checkpoint(dir / "junk.ckpt"), FormatError);
  }
}

TEST_CASE("model spec text round-trips") {
  ModelSpec spec = deep_crm_spec(40, 98, {8, 16, 32, 64, 64}, Activation::Elu);
  spec.keep_prob = 0.625;
  spec.dropout_blocks = {2, 4};
  spec.dropout_dense = false;
  const ModelSpec back = model_spec_from_text(model_spec_to_text(spec));
  CHECK(model_spec_to_text(back) == model_spec_to_text(spec));
  CHECK(back.variant == Variant::DeepCrm);
  CHECK(back.keep_prob == 0.625);
  CHECK(back.crm_filters == std::vector<int>{8, 16, 32, 64, 64});
  CHECK(back.dropout_blocks == std::vector<int>{2, 4});
}
