#include "dampkde/path_io.hpp"

#include "dampkde/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace dampkde {

namespace {

constexpr char kMagic[8] = { 'D', 'K', 'P', 'A', 'T', 'H', '0', '1' };

static_assert(std::endian::native == std::endian::little,
              "binary path format assumes a little-endian host");

template<class T>
void
put(std::ostream& out, T v)
{
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template<class T>
T
get(std::istream& in)
{
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in)
    throw Error(ErrorCode::io, "truncated binary path file");
  return v;
}

void
put_column(std::ostream& out, const std::vector<double>& v)
{
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void
get_column(std::istream& in, std::vector<double>& v, std::size_t n)
{
  v.resize(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in)
    throw Error(ErrorCode::io, "truncated binary path file");
}

double
parse_double(const std::string& s, const std::string& what)
{
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size())
      throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::io, "bad number for " + what + ": '" + s + "'");
  }
}

} // namespace

void
write_path_csv(std::ostream& out, const Path& path)
{
  out.precision(17);
  out << "# dt=" << path.dt << ", seed=" << path.seed
      << ", model=" << path.model_name << ", t0=" << path.t0 << '\n';
  out << "t,x,y,db\n";
  for (std::size_t i = 0; i < path.size(); ++i) {
    out << path.t0 + static_cast<double>(i) * path.dt << ',' << path.x[i]
        << ',' << path.y[i] << ',';
    if (i < path.db.size())
      out << path.db[i];
    out << '\n';
  }
}

Path
read_path_csv(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw Error(ErrorCode::io, "path CSV must start with a '# dt=...' header");
  std::map<std::string, std::string> header;
  std::stringstream hs(line.substr(2));
  std::string item;
  while (std::getline(hs, item, ',')) {
    const auto start = item.find_first_not_of(' ');
    if (start == std::string::npos)
      continue;
    item = item.substr(start);
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::io, "bad header field '" + item + "'");
    header[item.substr(0, eq)] = item.substr(eq + 1);
  }
  for (const char* key : { "dt", "seed", "model" })
    if (!header.count(key))
      throw Error(ErrorCode::io,
                  std::string("path CSV header lacks ") + key,
                  { { "key", key } });

  Path p;
  p.dt = parse_double(header["dt"], "dt");
  p.seed = std::stoull(header["seed"]);
  p.model_name = header["model"];
  if (header.count("t0"))
    p.t0 = parse_double(header["t0"], "t0");

  if (!std::getline(in, line) || line != "t,x,y,db")
    throw Error(ErrorCode::io, "path CSV column line must be 't,x,y,db'");
  bool last = false;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    if (last)
      throw Error(ErrorCode::io, "only the final row may omit db");
    std::stringstream ls(line);
    std::string t, x, y, db;
    std::getline(ls, t, ',');
    std::getline(ls, x, ',');
    std::getline(ls, y, ',');
    std::getline(ls, db, ',');
    p.x.push_back(parse_double(x, "x"));
    p.y.push_back(parse_double(y, "y"));
    if (db.empty())
      last = true;
    else
      p.db.push_back(parse_double(db, "db"));
  }
  if (p.x.empty() || p.db.size() + 1 != p.x.size())
    throw Error(ErrorCode::bookkeeping,
                "path CSV needs db on every row but the last");
  return p;
}

void
write_path_binary(std::ostream& out, const Path& path)
{
  out.write(kMagic, sizeof kMagic);
  put<std::uint64_t>(out, path.size());
  put<double>(out, path.t0);
  put<double>(out, path.dt);
  put<std::uint64_t>(out, path.seed);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(path.model_name.size()));
  out.write(path.model_name.data(),
            static_cast<std::streamsize>(path.model_name.size()));
  put_column(out, path.x);
  put_column(out, path.y);
  put_column(out, path.db);
}

Path
read_path_binary(std::istream& in)
{
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw Error(ErrorCode::io, "not a binary path file (bad magic)");
  Path p;
  const auto n = get<std::uint64_t>(in);
  if (n < 1)
    throw Error(ErrorCode::io, "binary path file holds no samples");
  p.t0 = get<double>(in);
  p.dt = get<double>(in);
  p.seed = get<std::uint64_t>(in);
  const auto len = get<std::uint32_t>(in);
  p.model_name.resize(len);
  in.read(p.model_name.data(), len);
  get_column(in, p.x, n);
  get_column(in, p.y, n);
  get_column(in, p.db, n - 1);
  return p;
}

void
save_path(const std::string& filename, const Path& path)
{
  const bool csv = filename.size() >= 4 &&
                   filename.compare(filename.size() - 4, 4, ".csv") == 0;
  std::ofstream out(filename, csv ? std::ios::out : std::ios::binary);
  if (!out)
    throw Error(ErrorCode::io, "cannot open " + filename + " for writing");
  if (csv)
    write_path_csv(out, path);
  else
    write_path_binary(out, path);
  if (!out)
    throw Error(ErrorCode::io, "write failed: " + filename);
}

Path
load_path(const std::string& filename)
{
  const bool csv = filename.size() >= 4 &&
                   filename.compare(filename.size() - 4, 4, ".csv") == 0;
  std::ifstream in(filename, csv ? std::ios::in : std::ios::binary);
  if (!in)
    throw Error(ErrorCode::io,
                "cannot open " + filename,
                { { "file", filename } });
  return csv ? read_path_csv(in) : read_path_binary(in);
}

} // namespace dampkde
