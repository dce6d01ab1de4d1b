#include "normprobe/cli/io.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "normprobe/error.hpp"

namespace normprobe::cli {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw DataError(path.string() + ": read failed");
  return buf.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(tmp.string() + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw DataError(tmp.string() + ": write failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw DataError(path.string() + ": rename failed: " + ec.message());
  }
}

void ensure_writable_dir(const fs::path& target) {
  const fs::path dir = target.empty() ? fs::path(".") : target;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output_dir " + dir.string() + ": " + ec.message());
  if (!fs::is_directory(dir)) throw ConfigError("output_dir " + dir.string() + ": not a directory");
  if (::access(dir.c_str(), W_OK | X_OK) != 0) {
    throw ConfigError("output_dir " + dir.string() + ": not writable");
  }
}

}  // namespace normprobe::cli
