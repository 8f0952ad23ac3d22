#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include <icann/io.hh>
#include <icann/property_checks.hh>

using namespace icann;
namespace fs = std::filesystem;

namespace {

class TempDir
{
public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("icann_io_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

private:
  fs::path path_;
};

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

io::KeyValueFile kv(const std::string& s) {
  std::istringstream in(s);
  return io::KeyValueFile::parse(in, "test.cfg");
}

std::string error_of(const fs::path& csv) {
  try {
    io::read_dataset(csv);
  } catch (const IoError& e) {
    return e.what();
  }
  return {};
}

} // namespace

TEST(FormatDouble, RoundTripsExactly) {
  checks::Rng rng(11);
  for (int k = 0; k < 1000; ++k) {
    const double x = checks::uniform(rng, -1e3, 1e3) * std::pow(10.0, checks::uniform(rng, -12.0, 12.0));
    EXPECT_EQ(io::parse_double(io::format_double(x), "x"), x);
  }
}

TEST(ParseDouble, Rejects) {
  EXPECT_THROW(io::parse_double("", "x"), IoError);
  EXPECT_THROW(io::parse_double("1.2.3", "x"), IoError);
  EXPECT_THROW(io::parse_double("abc", "x"), IoError);
  EXPECT_EQ(io::parse_double(" +2.5 ", "x"), 2.5);
}

TEST(KeyValueFile, CommentsAndDuplicates) {
  const auto f = kv("# header\n\na = 1  # trailing\nb=two\n");
  EXPECT_EQ(f.get("a"), "1");
  EXPECT_EQ(f.get("b"), "two");
  EXPECT_THROW(kv("a = 1\na = 2\n"), IoError);
  EXPECT_THROW(kv("no separator\n"), IoError);
  EXPECT_THROW(kv(" = 3\n"), IoError);
}

TEST(KeyValueFile, TypedAccessors) {
  const auto f = kv("n = 12\nx = 0.5\nflag = yes\nbad = 1.5\n");
  EXPECT_EQ(f.integer_or("n", 0), 12);
  EXPECT_EQ(f.integer_or("missing", 7), 7);
  EXPECT_EQ(f.number("x"), 0.5);
  EXPECT_TRUE(f.boolean_or("flag", false));
  EXPECT_THROW(f.integer_or("bad", 0), ConfigError);
  EXPECT_THROW(f.boolean_or("bad", false), ConfigError);
  EXPECT_THROW(f.get("missing"), ConfigError);
}

TEST(KeyValueFile, ErrorsNameTheLine) {
  try {
    kv("a = 1\n\nbroken\n");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("test.cfg:3"), std::string::npos) << e.what();
  }
}

TEST(Weights, RoundTripBitIdentical) {
  checks::Rng rng(12);
  for (int k = 0; k < 5; ++k) {
    const auto m = checks::random_interior_solid(rng, 1 + k % 3, k % 2 == 0);
    std::stringstream ss;
    io::write_weights(ss, m);
    const auto back = io::read_weights(io::KeyValueFile::parse(ss, "mem"));
    EXPECT_EQ(back.branches.size(), m.branches.size());
    EXPECT_EQ(back.equilibrium.has_value(), m.equilibrium.has_value());
    EXPECT_EQ(flatten(back), flatten(m));
  }
}

TEST(Weights, RoundTripThroughFile) {
  TempDir dir;
  const auto m = reference_as_network(ReferenceModel{});
  io::write_weights(dir / "w.txt", m);
  const std::string first = read_text(dir / "w.txt");
  io::write_weights(dir / "w2.txt", io::read_weights(dir / "w.txt"));
  EXPECT_EQ(read_text(dir / "w2.txt"), first);
}

TEST(Weights, ListsMissingKeys) {
  std::stringstream ss;
  io::write_weights(ss, ViscoSolid<double>::maxwell());
  std::string text, line;
  while (std::getline(ss, line))
    if (line.find("neq1.psi.w2_1 ") == std::string::npos && line.find("neq1.g.w2_8 ") == std::string::npos)
      text += line + '\n';
  try {
    io::read_weights(kv(text));
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("neq1.psi.w2_1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("neq1.g.w2_8"), std::string::npos) << msg;
  }
}

TEST(Weights, RejectsUnknownKeysAndNonFinite) {
  std::stringstream ss;
  io::write_weights(ss, ViscoSolid<double>::maxwell());
  EXPECT_THROW(io::read_weights(kv(ss.str() + "neq1.psi.w9_9 = 1\n")), ConfigError);
  std::string text = ss.str();
  const auto pos   = text.find("neq1.psi.w2_1 = ");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, text.find('\n', pos) - pos, "neq1.psi.w2_1 = nan");
  EXPECT_THROW(io::read_weights(kv(text)), IoError);
}

TEST(Weights, TopologyValidation) {
  EXPECT_THROW(io::read_weights(kv("branches = 0\n")), ConfigError);
  EXPECT_THROW(io::read_weights(kv("potential = other\n")), ConfigError);
}

TEST(Weights, FixturesLoad) {
  const fs::path dir = fs::path(ICANN_FIXTURES) / "weights";
  const auto a1      = io::read_weights(dir / "artificial_a1.txt");
  EXPECT_EQ(a1.branches.size(), 1u);
  EXPECT_FALSE(a1.equilibrium.has_value());
  const auto vhb = io::read_weights(dir / "vhb_a2.txt");
  EXPECT_GE(vhb.branches.size(), 1u);
  for (const char* name : {"muscle_train_one.txt", "muscle_train_four.txt"})
    EXPECT_NO_THROW(io::read_weights(dir / name)) << name;
}

TEST(Dataset, RoundTrip) {
  TempDir dir;
  const auto data = generate_artificial_dataset(ReferenceModel{});
  for (const auto& d : data) {
    const fs::path p = dir / (d.name + ".csv");
    io::write_dataset(p, d);
    const auto back = io::read_dataset(p);
    EXPECT_EQ(back.name, d.name);
    EXPECT_EQ(back.path.protocol, d.path.protocol);
    EXPECT_EQ(back.path.time, d.path.time);
    EXPECT_EQ(back.path.c11, d.path.c11);
    EXPECT_EQ(back.stress, d.stress);
    if (std::isfinite(d.c11_max))
      EXPECT_EQ(back.c11_max, d.c11_max);
    else
      EXPECT_TRUE(std::isnan(back.c11_max));
  }
}

TEST(Dataset, WithoutSidecar) {
  TempDir dir;
  write_text(dir / "plain.csv", "t,C11,S11\n0,1,0\n0.1,1.1,0.5\n");
  const auto d = io::read_dataset(dir / "plain.csv");
  EXPECT_EQ(d.name, "plain");
  EXPECT_EQ(d.path.protocol, Protocol::uniaxial);
  EXPECT_EQ(d.path.size(), 2u);
}

TEST(Dataset, RejectsWithRowNumbers) {
  TempDir dir;
  const std::vector<std::pair<std::string, std::string>> cases{
      {"t,C11,S11\n0,1,0\n0.2,1.1,0.5\n0.1,1.2,0.6\n", "row 4"},
      {"t,C11,S11\n0,1,0\n0.1,1.1,0.5\n0.2,1.1,0.5\n0.3,1.2,0.5\n0.3,1.3,0.5\n", "row 6"},
      {"t,C11,S11\n0,1,0\n0.1,inf,0.5\n", "row 3"},
      {"t,C11,S11\n0,1,0\n0.1,1.1,nan\n", "row 3"},
      {"t,C11,S11\n0,1,0\n0.1,0,0.5\n", "row 3"},
      {"t,C11,S11\n0,1,0\n0.1,-0.5,0.5\n", "row 3"},
      {"t,C11,S11\n0,1,0\n0.1,1.1\n", "row 3"},
      {"t,C11,S11\n0,1,0\n0.1,1.1,x\n", "row 3"},
      {"time,C11,S11\n0,1,0\n0.1,1.1,0.5\n", "row 1"},
  };
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const fs::path p = dir / ("bad" + std::to_string(k) + ".csv");
    write_text(p, cases[k].first);
    const std::string msg = error_of(p);
    EXPECT_NE(msg.find(cases[k].second), std::string::npos) << "case " << k << ": '" << msg << "'";
  }
  write_text(dir / "short.csv", "t,C11,S11\n0,1,0\n");
  EXPECT_THROW(io::read_dataset(dir / "short.csv"), IoError);
  EXPECT_THROW(io::read_dataset(dir / "absent.csv"), IoError);
}

TEST(Dataset, BadSidecarProtocol) {
  TempDir dir;
  write_text(dir / "d.csv", "t,C11,S11\n0,1,0\n0.1,1.1,0.5\n");
  write_text(dir / "d.csv.meta", "protocol = torsion\n");
  EXPECT_THROW(io::read_dataset(dir / "d.csv"), IoError);
}

TEST(RunConfig, Defaults) {
  const auto c = io::parse_run_config(kv("train = a.csv\n"), "/base");
  EXPECT_EQ(c.train.epochs, 10000);
  EXPECT_EQ(c.train.learning_rate, 1e-3);
  EXPECT_EQ(c.train.l2, 1e-3);
  ASSERT_EQ(c.train_data.size(), 1u);
  EXPECT_EQ(c.train_data[0], fs::path("/base/a.csv"));
  EXPECT_TRUE(c.test_data.empty());
}

TEST(RunConfig, Lists) {
  const auto c = io::parse_run_config(kv("train = a.csv, b.csv ,c.csv\ntest = d.csv\nepochs = 5\n"), "/x");
  EXPECT_EQ(c.train_data.size(), 3u);
  EXPECT_EQ(c.train_data[1], fs::path("/x/b.csv"));
  EXPECT_EQ(c.test_data.size(), 1u);
  EXPECT_EQ(c.train.epochs, 5);
}

TEST(RunConfig, EmptyTrainingList) {
  const auto c = io::parse_run_config(kv("train =\n"), "/x");
  EXPECT_TRUE(c.train_data.empty());
}

TEST(RunConfig, Rejects) {
  EXPECT_THROW(io::parse_run_config(kv("train = a.csv\ntest = a.csv\n"), "/x"), ConfigError);
  EXPECT_THROW(io::parse_run_config(kv("train = a.csv\nlearnig_rate = 1\n"), "/x"), ConfigError);
  EXPECT_THROW(io::parse_run_config(kv("epochs = 0\n"), "/x"), ConfigError);
  EXPECT_THROW(io::parse_run_config(kv("l2 = -1\n"), "/x"), ConfigError);
  EXPECT_THROW(io::parse_run_config(kv("l2_scope = some\n"), "/x"), ConfigError);
  EXPECT_THROW(io::parse_run_config(kv("gradient = forward\n"), "/x"), ConfigError);
}

TEST(RunConfig, ShippedConfigsParse) {
  const fs::path dir = fs::path(ICANN_FIXTURES).parent_path() / "configs";
  const auto c       = io::load_run_config(dir / "example1.cfg");
  EXPECT_EQ(c.train.epochs, 10000);
  EXPECT_EQ(c.train_data.size(), 4u);
  EXPECT_EQ(c.test_data.size(), 1u);
  EXPECT_EQ(c.reference.mu, 12.5);
  EXPECT_EQ(c.reference.K, 25.0);
  EXPECT_EQ(c.reference.tau, 10.0);
  for (const char* name : {"vhb.cfg", "muscle_train_four.cfg"}) {
    const auto e = io::load_run_config(dir / name);
    EXPECT_EQ(e.topology.branches, 3u) << name;
    EXPECT_TRUE(e.topology.equilibrium) << name;
  }
}

TEST(Export, MetricsAndLoss) {
  TempDir dir;
  const auto data = generate_artificial_dataset(ReferenceModel{});
  std::vector<io::MetricsRow> rows{{data[0].name, "train", &data[0], {data[0].name, {0.01, 0.99}, false}},
                                   {data[4].name, "test", &data[4], {data[4].name, {}, true}}};
  io::write_metrics(dir / "m.csv", rows);
  const std::string m = read_text(dir / "m.csv");
  EXPECT_NE(m.find("uniaxial_tension,train,uniaxial,1.5,,0.01,0.99"), std::string::npos) << m;
  EXPECT_NE(m.find("uniaxial_cyclic,test,uniaxial,,,failed,failed"), std::string::npos) << m;
  const std::vector<double> h{3.0, 2.5};
  io::write_loss_history(dir / "l.csv", h);
  EXPECT_EQ(read_text(dir / "l.csv"), "epoch,loss\n0,3\n1,2.5\n");
}
