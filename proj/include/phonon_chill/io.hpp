#pragma once

// Deterministic CSV/JSON emission. CSV: '.' decimal, LF endings, 17
// significant digits, one '# manifest: <file>' line then a header row.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace phonon_chill {

using Json = nlohmann::ordered_json;

inline std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row)
    {
        if (row.size() != columns.size()) {
            throw InvalidInput("table row width does not match the header");
        }
        rows.push_back(std::move(row));
    }

    Json to_json() const
    {
        Json out = Json::object();
        for (std::size_t c = 0; c < columns.size(); ++c) {
            Json col = Json::array();
            for (const auto& row : rows) {
                col.push_back(row[c]);
            }
            out[columns[c]] = std::move(col);
        }
        return out;
    }
};

inline std::string to_csv(const Table& table, const std::string& manifest_name)
{
    std::ostringstream out;
    out << "# manifest: " << manifest_name << '\n';
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out << (c ? "," : "") << table.columns[c];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << (c ? "," : "") << format_number(row[c]);
        }
        out << '\n';
    }
    return out.str();
}

/// Parses what to_csv writes; returns the table and the manifest reference.
inline Table read_csv(const std::string& text, std::string* manifest = nullptr)
{
    std::istringstream in(text);
    std::string line;
    Table table;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            const std::string tag = "# manifest: ";
            if (manifest && line.rfind(tag, 0) == 0) {
                *manifest = line.substr(tag.size());
            }
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        if (!header) {
            table.columns = cells;
            header = true;
            continue;
        }
        std::vector<double> row;
        for (const auto& c : cells) {
            row.push_back(std::stod(c));
        }
        table.add(std::move(row));
    }
    return table;
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw Error("failed writing " + path.string());
    }
}

struct OutputFormats {
    bool csv = true;
    bool json = true;
};

/// Collects data files for one run and writes them together with their manifest.
class OutputSet {
public:
    OutputSet(std::filesystem::path dir, std::string stem, OutputFormats formats)
        : dir_(std::move(dir)), stem_(std::move(stem)), formats_(formats)
    {
    }

    std::string manifest_name() const { return stem_ + ".manifest.json"; }

    void add(const std::string& name, const Table& table, Json meta = Json::object())
    {
        entries_.push_back({name, table, std::move(meta)});
    }

    /// Writes every table and the manifest; `manifest` gets the file list.
    std::vector<std::filesystem::path> write(Json manifest) const
    {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) {
            throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());
        }
        std::vector<std::filesystem::path> written;
        Json files = Json::array();
        for (const auto& e : entries_) {
            if (formats_.csv) {
                const auto path = dir_ / (e.name + ".csv");
                write_text(path, to_csv(e.table, manifest_name()));
                written.push_back(path);
                files.push_back(path.filename().string());
            }
            if (formats_.json) {
                Json doc = Json::object();
                doc["manifest"] = manifest_name();
                doc["meta"] = e.meta;
                doc["columns"] = e.table.columns;
                doc["data"] = e.table.to_json();
                const auto path = dir_ / (e.name + ".json");
                write_text(path, doc.dump(2) + "\n");
                written.push_back(path);
                files.push_back(path.filename().string());
            }
        }
        manifest["files"] = files;
        const auto path = dir_ / manifest_name();
        write_text(path, manifest.dump(2) + "\n");
        written.push_back(path);
        return written;
    }

private:
    struct Entry {
        std::string name;
        Table table;
        Json meta;
    };

    std::filesystem::path dir_;
    std::string stem_;
    OutputFormats formats_;
    std::vector<Entry> entries_;
};

} // namespace phonon_chill
