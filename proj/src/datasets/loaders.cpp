#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sslp/datasets.hpp"

namespace fs = std::filesystem;

namespace sslp::data {

void LabeledDataset::validate() const {
  SSLP_CHECK(images.size() == labels.size(), "dataset '", name, "': ", images.size(),
             " images vs ", labels.size(), " labels");
  SSLP_CHECK(class_count > 0, "dataset '", name, "': class_count must be positive");
  for (std::size_t i = 0; i < labels.size(); ++i)
    SSLP_CHECK(labels[i] >= 0 && labels[i] < class_count, "dataset '", name, "': label ",
               labels[i], " of sample ", i, " outside [0,", class_count, ")");
  for (const auto& [attr, column] : attributes)
    SSLP_CHECK(column.size() == images.size(), "dataset '", name, "': attribute '", attr,
               "' covers ", column.size(), " of ", images.size(), " samples");
}

SourceFormat source_format_from_string(const std::string& s) {
  if (s == "cifar_binary") return SourceFormat::cifar_binary;
  if (s == "image_folder") return SourceFormat::image_folder;
  if (s == "attribute_csv_folder") return SourceFormat::attribute_csv_folder;
  SSLP_CHECK(false, "unknown dataset format: ", s);
  return SourceFormat::image_folder;
}

namespace {

constexpr int kCifarDim = 32, kCifarRecord = 1 + 3 * kCifarDim * kCifarDim;

void load_cifar_file(const std::string& path, LabeledDataset& ds) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  SSLP_CHECK(in, "cannot open cifar file: ", path);
  const std::streamsize size = in.tellg();
  in.seekg(0);
  SSLP_CHECK(size % kCifarRecord == 0, "malformed cifar record at byte offset ",
             (size / kCifarRecord) * kCifarRecord, " in ", path, " (file size ", size,
             " is not a multiple of ", kCifarRecord, ")");
  const std::int64_t records = size / kCifarRecord;
  std::vector<std::uint8_t> buf(kCifarRecord);
  for (std::int64_t r = 0; r < records; ++r) {
    in.read(reinterpret_cast<char*>(buf.data()), kCifarRecord);
    SSLP_CHECK(in, "short read at byte offset ", r * kCifarRecord, " in ", path);
    const int label = buf[0];
    SSLP_CHECK(label < 10, "label ", label, " out of range at byte offset ",
               r * kCifarRecord, " in ", path);
    Image img(3, kCifarDim, kCifarDim);
    for (std::size_t i = 0; i < img.v.size(); ++i)
      img.v[i] = static_cast<float>(buf[1 + i]) / 255.0f;
    ds.images.push_back(std::move(img));
    ds.labels.push_back(label);
  }
}

LabeledDataset load_cifar(const std::string& path) {
  LabeledDataset ds;
  ds.name = fs::path(path).filename().string();
  ds.class_count = 10;
  if (fs::is_directory(path)) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(path))
      if (e.path().extension() == ".bin") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    SSLP_CHECK(!files.empty(), "no .bin files found in ", path);
    for (const std::string& f : files) load_cifar_file(f, ds);
  } else {
    load_cifar_file(path, ds);
  }
  ds.validate();
  return ds;
}

bool is_image_file(const fs::path& p) {
  const std::string e = p.extension().string();
  return e == ".png" || e == ".ppm" || e == ".pgm";
}

LabeledDataset load_image_folder(const std::string& root) {
  SSLP_CHECK(fs::is_directory(root), "image_folder path is not a directory: ", root);
  std::vector<std::string> classes;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) classes.push_back(e.path().filename().string());
  std::sort(classes.begin(), classes.end());

  LabeledDataset ds;
  ds.name = fs::path(root).filename().string();
  ds.class_count = static_cast<int>(classes.size());
  for (int c = 0; c < ds.class_count; ++c) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(fs::path(root) / classes[c]))
      if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    for (const std::string& f : files) {
      ds.images.push_back(read_image(f));
      ds.labels.push_back(c);
    }
  }
  SSLP_CHECK(!ds.images.empty(), "no samples found in ", root);
  ds.validate();
  return ds;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    out.push_back(field);
  }
  return out;
}

LabeledDataset load_attribute_folder(const std::string& root, const std::string& label_attr) {
  const fs::path csv = fs::path(root) / "attributes.csv";
  std::ifstream in(csv);
  SSLP_CHECK(in, "cannot open attribute table: ", csv.string());

  std::string line;
  SSLP_CHECK(std::getline(in, line), "empty attribute table: ", csv.string());
  const std::vector<std::string> header = split_csv_line(line);
  SSLP_CHECK(header.size() >= 2 && header[0] == "file",
             "attribute CSV header must be 'file,attr1,...' in ", csv.string());
  std::vector<std::string> attrs(header.begin() + 1, header.end());

  LabeledDataset ds;
  ds.name = fs::path(root).filename().string();
  for (const std::string& a : attrs) ds.attributes[a] = {};

  struct Row {
    std::string file;
    std::vector<int> values;
  };
  std::vector<Row> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    SSLP_CHECK(fields.size() == header.size(), "row ", lineno, " of ", csv.string(), " has ",
               fields.size(), " fields, expected ", header.size());
    Row r;
    r.file = fields[0];
    for (std::size_t i = 1; i < fields.size(); ++i) {
      SSLP_CHECK(fields[i] == "0" || fields[i] == "1", "attribute value '", fields[i],
                 "' at row ", lineno, " of ", csv.string(), " is not 0/1");
      r.values.push_back(fields[i] == "1" ? 1 : 0);
    }
    rows.push_back(std::move(r));
  }
  SSLP_CHECK(!rows.empty(), "no samples found in ", root);
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.file < b.file; });

  const std::string label_col = label_attr.empty() ? attrs[0] : label_attr;
  auto it = std::find(attrs.begin(), attrs.end(), label_col);
  SSLP_CHECK(it != attrs.end(), "label attribute '", label_col, "' not in CSV header of ",
             csv.string());
  const std::size_t label_idx = static_cast<std::size_t>(it - attrs.begin());

  for (const Row& r : rows) {
    const fs::path img = fs::path(root) / r.file;
    SSLP_CHECK(fs::exists(img), "attribute table lists missing file: ", img.string());
    ds.images.push_back(read_image(img.string()));
    ds.labels.push_back(r.values[label_idx]);
    for (std::size_t i = 0; i < attrs.size(); ++i) ds.attributes[attrs[i]].push_back(r.values[i]);
  }
  ds.class_count = 2;
  ds.validate();
  return ds;
}

}  // namespace

LabeledDataset load_dataset(const std::string& path, SourceFormat format,
                            const std::string& label_attr) {
  SSLP_CHECK(fs::exists(path), "dataset path does not exist: ", path);
  switch (format) {
    case SourceFormat::cifar_binary: return load_cifar(path);
    case SourceFormat::image_folder: return load_image_folder(path);
    case SourceFormat::attribute_csv_folder: return load_attribute_folder(path, label_attr);
  }
  SSLP_CHECK(false, "unhandled format");
  return {};
}

}  // namespace sslp::data
