#include "condgan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <openssl/evp.h>

#include "condgan/errors.hpp"

namespace condgan {

namespace {

constexpr char kMagic[8] = {'C', 'G', 'A', 'N', 'C', 'K', 'P', 'T'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  void need(std::uint64_t n, const char* what) const {
    if (n > bytes_.size() - pos_) throw ParseError(std::string("container truncated while reading ") + what, pos_);
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string text(std::uint64_t n, const char* what) {
    need(n, what);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_), bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  std::uint64_t pos() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<unsigned char>& bytes_;
  std::uint64_t pos_ = 0;
};

}  // namespace

const Tensor& Container::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw DataError("container has no tensor named '" + name + "'");
}

bool Container::has(const std::string& name) const {
  for (const auto& entry : tensors)
    if (entry.first == name) return true;
  return false;
}

std::vector<unsigned char> encode_container(const Container& c) {
  std::vector<unsigned char> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kContainerVersion);
  const std::string header = c.header.dump();
  put_u64(out, header.size());
  out.insert(out.end(), header.begin(), header.end());
  put_u32(out, static_cast<std::uint32_t>(c.tensors.size()));
  for (const auto& [name, t] : c.tensors) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (auto e : t.shape()) put_u64(out, e);
    for (double v : t.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

Container decode_container(const std::vector<unsigned char>& bytes) {
  Reader r(bytes);
  r.need(8, "magic");
  if (std::memcmp(bytes.data(), kMagic, 8) != 0) throw ParseError("not a condgan container (bad magic)", 0);
  (void)r.text(8, "magic");
  const std::uint64_t version_at = r.pos();
  const std::uint32_t version = r.u32("version");
  if (version != kContainerVersion) {
    throw ParseError("unsupported container version " + std::to_string(version), version_at);
  }
  Container c;
  const std::uint64_t header_len = r.u64("header length");
  const std::uint64_t header_at = r.pos();
  const std::string header = r.text(header_len, "header");
  try {
    c.header = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("container header is not valid JSON: ") + e.what(), header_at);
  }
  const std::uint32_t count = r.u32("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = r.text(r.u32("name length"), "tensor name");
    const std::uint64_t rank_at = r.pos();
    const std::uint32_t rank = r.u32("rank");
    if (rank > 16) throw ParseError("implausible tensor rank " + std::to_string(rank), rank_at);
    Shape shape;
    std::uint64_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      const std::uint64_t at = r.pos();
      const std::uint64_t e = r.u64("extent");
      if (e == 0 || e > (bytes.size() / 8 + 1)) throw ParseError("invalid extent for tensor '" + name + "'", at);
      n *= e;
      if (n > bytes.size() / 8 + 1) throw ParseError("tensor '" + name + "' larger than file", at);
      shape.push_back(static_cast<std::size_t>(e));
    }
    r.need(n * 8, "tensor data");
    std::vector<double> data(static_cast<std::size_t>(n));
    for (auto& v : data) v = std::bit_cast<double>(r.u64("value"));
    c.tensors.emplace_back(name, Tensor(std::move(shape), std::move(data)));
  }
  if (!r.done()) throw ParseError("trailing bytes after container payload", r.pos());
  return c;
}

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to '" + path.string() + "'");
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::vector<unsigned char>(text.begin(), text.end()));
}

void write_container(const std::filesystem::path& path, const Container& c) {
  write_file_bytes(path, encode_container(c));
}

Container read_container(const std::filesystem::path& path) { return decode_container(read_file_bytes(path)); }

std::string sha256_hex(const std::vector<unsigned char>& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

std::string sha256_hex(const std::string& text) {
  return sha256_hex(std::vector<unsigned char>(text.begin(), text.end()));
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file_bytes(path)); }

}  // namespace condgan
