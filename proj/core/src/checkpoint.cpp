#include <fstream>

#include "binary_io.hpp"
#include "rexha/error.hpp"
#include "rexha/graph_encoder.hpp"

namespace rexha::gcn {

namespace {

constexpr char kMagic[5] = "RXGE";
constexpr std::uint64_t kHeaderBytes = 4 + 4 * 4 + 8 * 2;

void put_matrix(std::ostream& out, const RowMatrix& m) {
  for (Eigen::Index k = 0; k < m.size(); ++k) detail::put_f32(out, static_cast<float>(m.data()[k]));
}

void put_vector(std::ostream& out, const Vector& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) detail::put_f32(out, static_cast<float>(v[k]));
}

RowMatrix get_matrix(std::istream& in, std::uint64_t rows, std::uint64_t cols, const char* what) {
  RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = detail::get_f32(in, what);
  return m;
}

Vector get_vector(std::istream& in, std::uint64_t n, const char* what) {
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = detail::get_f32(in, what);
  return v;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const EmbeddingTable& table, const ProjectionNet& net) {
  if (table.users.cols() != table.items.cols() || static_cast<std::size_t>(table.users.cols()) != net.input_width()) {
    throw Error(ErrorKind::kInvalidArgument, "checkpoint: table width does not match projection input");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(kMagic, 4);
  detail::put_le<std::uint32_t>(out, kCheckpointVersion);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(net.input_width()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(net.output_width()));
  detail::put_le<std::uint32_t>(out, table.layers);
  detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(table.users.rows()));
  detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(table.items.rows()));
  put_matrix(out, table.users);
  put_matrix(out, table.items);
  for (const auto& layer : net.layers()) {
    put_matrix(out, layer.weight);
    put_vector(out, layer.bias);
  }
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path, Activation activation) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  const auto file_size = static_cast<std::uint64_t>(std::filesystem::file_size(path));
  detail::expect_magic(in, kMagic, path.string());
  const auto version = detail::get_le<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw Error(ErrorKind::kParse, "unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint64_t d_gcn = detail::get_le<std::uint32_t>(in, "d_gcn");
  const std::uint64_t d_llm = detail::get_le<std::uint32_t>(in, "d_llm");
  const auto layers = detail::get_le<std::uint32_t>(in, "layer count");
  const auto user_rows = detail::get_le<std::uint64_t>(in, "user rows");
  const auto item_rows = detail::get_le<std::uint64_t>(in, "item rows");

  const std::uint64_t table_floats = (user_rows + item_rows) * d_gcn;
  if (file_size < kHeaderBytes || (file_size - kHeaderBytes) % 4 != 0 ||
      (file_size - kHeaderBytes) / 4 < table_floats) {
    throw Error(ErrorKind::kParse, "checkpoint payload length is inconsistent with its header");
  }
  // Projection floats: h*d_gcn + h + h*h + h + d_llm*h + d_llm.
  const std::uint64_t net_floats = (file_size - kHeaderBytes) / 4 - table_floats;
  std::uint64_t hidden = 0;
  for (std::uint64_t h = 1;; ++h) {
    const std::uint64_t need = h * d_gcn + h + h * h + h + d_llm * h + d_llm;
    if (need == net_floats) {
      hidden = h;
      break;
    }
    if (need > net_floats) throw Error(ErrorKind::kParse, "checkpoint projection payload has no valid hidden width");
  }

  Checkpoint ck;
  ck.table.layers = layers;
  ck.table.users = get_matrix(in, user_rows, d_gcn, "user table");
  ck.table.items = get_matrix(in, item_rows, d_gcn, "item table");
  std::array<DenseLayer, 3> net;
  const std::uint64_t ins[3] = {d_gcn, hidden, hidden};
  const std::uint64_t outs[3] = {hidden, hidden, d_llm};
  for (std::size_t l = 0; l < 3; ++l) {
    net[l].weight = get_matrix(in, outs[l], ins[l], "projection weight");
    net[l].bias = get_vector(in, outs[l], "projection bias");
  }
  ck.net = ProjectionNet(std::move(net), activation);
  return ck;
}

}  // namespace rexha::gcn
