#include "inkline/io.hpp"

#include "inkline/error.hpp"

#include <fstream>
#include <sstream>

namespace inkline::io {

std::string read_text(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("io.read", "cannot read " + file.string(), file.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const std::filesystem::path& file, std::string_view content)
{
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    auto tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("io.write", "cannot write " + file.string(), file.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("io.write", "cannot write " + file.string(), file.string());
    }
    std::filesystem::rename(tmp, file);
}

} // namespace inkline::io
