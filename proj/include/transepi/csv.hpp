#ifndef TRANSEPI_CSV_HPP
#define TRANSEPI_CSV_HPP

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

namespace transepi {

// Minimal CSV support: comma separated, double-quote quoting, UTF-8, header
// row required. Lines starting with '#' are treated as comments (our own
// writers put a config-echo comment at the top of every emitted CSV).

std::vector<std::string> split_csv_line(const std::string& line);

std::string csv_escape(const std::string& field);

class CsvReader {
public:
    // Throws std::runtime_error if the file cannot be opened or has no header.
    explicit CsvReader(const std::string& path);

    // Column index lookup; -1 when the header does not contain the name.
    int column(const std::string& name) const;

    bool has_column(const std::string& name) const { return column(name) >= 0; }

    // Reads the next record. Returns false at EOF. Blank and comment lines
    // are skipped. line_number() reports the 1-based physical line.
    bool next(std::vector<std::string>& row);

    size_t line_number() const { return line_number_; }
    const std::vector<std::string>& header() const { return header_; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::string content_;
    size_t pos_ = 0;
    size_t line_number_ = 0;
    std::vector<std::string> header_;
    std::unordered_map<std::string, int> column_index_;

    bool next_line(std::string& line);
};

class CsvWriter {
public:
    CsvWriter() = default;

    void comment(const std::string& text);  // emitted as "# text"
    void row(const std::vector<std::string>& fields);
    const std::string& str() const { return out_; }

private:
    std::string out_;
};

}  // namespace transepi

#endif
