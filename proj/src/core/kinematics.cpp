#include "core/kinematics.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "core/error.hpp"

namespace ewm::kin {

void SkeletonTopology::validate() const {
  require(joint_count == kBodyJoints, ErrorCode::InvalidArgument,
          "topology must have 22 joints");
  require(parent_index[0] == -1, ErrorCode::InvalidArgument,
          "joint 0 must be the root");
  for (int j = 1; j < joint_count; ++j) {
    require(parent_index[j] >= 0 && parent_index[j] < j,
            ErrorCode::InvalidArgument,
            "parent of joint " + std::to_string(j) +
                " must precede it (tree rooted at 0)");
  }
  for (int j = 0; j < joint_count; ++j)
    require(finite(rest_offset[j]), ErrorCode::InvalidArgument,
            "non-finite rest offset");
  for (int idx : {head_index, neck_index, left_wrist_index, right_wrist_index})
    require(idx >= 0 && idx < joint_count, ErrorCode::InvalidArgument,
            "named joint index out of range");
  require(finite(eye_offset_left) && finite(eye_offset_right),
          ErrorCode::InvalidArgument, "non-finite eye offset");
}

const SkeletonTopology& default_topology() {
  static const SkeletonTopology topo = [] {
    SkeletonTopology t;
    struct J {
      const char* name;
      int parent;
      double x, y, z;
    };
    // Subject's left is -X, up is +Y, facing is +Z at the zero pose.
    static constexpr J joints[kBodyJoints] = {
        {"pelvis", -1, 0.0, 0.0, 0.0},
        {"l_hip", 0, -0.09, -0.06, 0.0},
        {"r_hip", 0, 0.09, -0.06, 0.0},
        {"spine1", 0, 0.0, 0.11, 0.0},
        {"l_knee", 1, 0.0, -0.40, 0.0},
        {"r_knee", 2, 0.0, -0.40, 0.0},
        {"spine2", 3, 0.0, 0.12, 0.0},
        {"l_ankle", 4, 0.0, -0.42, 0.0},
        {"r_ankle", 5, 0.0, -0.42, 0.0},
        {"spine3", 6, 0.0, 0.13, 0.0},
        {"l_foot", 7, 0.0, -0.07, 0.12},
        {"r_foot", 8, 0.0, -0.07, 0.12},
        {"neck", 9, 0.0, 0.14, 0.0},
        {"l_collar", 9, -0.06, 0.10, 0.0},
        {"r_collar", 9, 0.06, 0.10, 0.0},
        {"head", 12, 0.0, 0.12, 0.0},
        {"l_shoulder", 13, -0.11, 0.02, 0.0},
        {"r_shoulder", 14, 0.11, 0.02, 0.0},
        {"l_elbow", 16, 0.0, -0.02, 0.27},
        {"r_elbow", 17, 0.0, -0.02, 0.27},
        {"l_wrist", 18, 0.0, 0.0, 0.25},
        {"r_wrist", 19, 0.0, 0.0, 0.25},
    };
    for (int j = 0; j < kBodyJoints; ++j) {
      t.joint_name[j] = joints[j].name;
      t.parent_index[j] = joints[j].parent;
      t.rest_offset[j] = Vec3(joints[j].x, joints[j].y, joints[j].z);
    }
    t.head_index = 15;
    t.neck_index = 12;
    t.left_wrist_index = 20;
    t.right_wrist_index = 21;
    t.eye_offset_left = Vec3(-0.03, 0.0, 0.08);
    t.eye_offset_right = Vec3(0.03, 0.0, 0.08);
    t.validate();
    return t;
  }();
  return topo;
}

namespace {

// Shared line scanner for the structured-text formats: skips blanks and
// '#' comments, yields whitespace-split tokens per line.
std::vector<std::vector<std::string>> read_stanzas(const std::string& path,
                                                   const char* expected_magic) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open: " + path);
  std::vector<std::vector<std::string>> lines;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<std::string> toks;
    std::string tok;
    while (ss >> tok) toks.push_back(tok);
    if (!toks.empty()) lines.push_back(std::move(toks));
  }
  require(!lines.empty() && lines[0].size() == 1 &&
              lines[0][0] == expected_magic,
          ErrorCode::ParseError,
          path + ": expected magic line '" + expected_magic + "'");
  require(lines.size() > 1 && lines[1].size() == 2 &&
              lines[1][0] == "format_version",
          ErrorCode::ParseError, path + ": missing format_version");
  require(lines[1][1] == "1", ErrorCode::ParseError,
          path + ": unsupported format_version " + lines[1][1]);
  lines.erase(lines.begin(), lines.begin() + 2);
  return lines;
}

int to_int(const std::string& s) {
  size_t pos = 0;
  int v = std::stoi(s, &pos);
  require(pos == s.size(), ErrorCode::ParseError, "bad integer: " + s);
  return v;
}

double to_double(const std::string& s) {
  size_t pos = 0;
  double v = std::stod(s, &pos);
  require(pos == s.size(), ErrorCode::ParseError, "bad number: " + s);
  return v;
}

}  // namespace

SkeletonTopology load_topology(const std::string& path) {
  SkeletonTopology t;
  std::set<int> seen;
  for (const auto& toks : read_stanzas(path, "ewm-topology")) {
    const std::string& key = toks[0];
    if (key == "joint_count") {
      require(toks.size() == 2 && to_int(toks[1]) == kBodyJoints,
              ErrorCode::ParseError, path + ": joint_count must be 22");
    } else if (key == "joint") {
      require(toks.size() == 7, ErrorCode::ParseError,
              path + ": joint line needs index name parent ox oy oz");
      int j = to_int(toks[1]);
      require(j >= 0 && j < kBodyJoints && seen.insert(j).second,
              ErrorCode::ParseError, path + ": bad or duplicate joint index");
      t.joint_name[j] = toks[2];
      t.parent_index[j] = to_int(toks[3]);
      t.rest_offset[j] =
          Vec3(to_double(toks[4]), to_double(toks[5]), to_double(toks[6]));
    } else if (key == "head_index") {
      t.head_index = to_int(toks.at(1));
    } else if (key == "neck_index") {
      t.neck_index = to_int(toks.at(1));
    } else if (key == "left_wrist_index") {
      t.left_wrist_index = to_int(toks.at(1));
    } else if (key == "right_wrist_index") {
      t.right_wrist_index = to_int(toks.at(1));
    } else if (key == "eye_left" || key == "eye_right") {
      require(toks.size() == 4, ErrorCode::ParseError,
              path + ": eye line needs x y z");
      Vec3 v(to_double(toks[1]), to_double(toks[2]), to_double(toks[3]));
      (key == "eye_left" ? t.eye_offset_left : t.eye_offset_right) = v;
    } else {
      throw Error(ErrorCode::ParseError, path + ": unknown key '" + key + "'");
    }
  }
  require(seen.size() == kBodyJoints, ErrorCode::ParseError,
          path + ": topology must define all 22 joints");
  t.validate();
  return t;
}

void save_topology(const SkeletonTopology& topo, const std::string& path) {
  topo.validate();
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot open for write: " + path);
  out << "ewm-topology\nformat_version 1\njoint_count " << topo.joint_count
      << "\n# joint <index> <name> <parent> <ox> <oy> <oz>\n";
  out.precision(17);
  for (int j = 0; j < topo.joint_count; ++j) {
    const Vec3& o = topo.rest_offset[j];
    out << "joint " << j << " " << topo.joint_name[j] << " "
        << topo.parent_index[j] << " " << o.x() << " " << o.y() << " "
        << o.z() << "\n";
  }
  out << "head_index " << topo.head_index << "\n"
      << "neck_index " << topo.neck_index << "\n"
      << "left_wrist_index " << topo.left_wrist_index << "\n"
      << "right_wrist_index " << topo.right_wrist_index << "\n"
      << "eye_left " << topo.eye_offset_left.x() << " "
      << topo.eye_offset_left.y() << " " << topo.eye_offset_left.z() << "\n"
      << "eye_right " << topo.eye_offset_right.x() << " "
      << topo.eye_offset_right.y() << " " << topo.eye_offset_right.z() << "\n";
  require(out.good(), ErrorCode::IoError, "short write: " + path);
}

bool BodyPose::is_finite() const {
  if (!finite(root_translation)) return false;
  return std::all_of(joint_euler.begin(), joint_euler.end(),
                     [](const Vec3& v) { return finite(v); });
}

bool BodyPose::operator==(const BodyPose& o) const {
  return root_translation == o.root_translation && joint_euler == o.joint_euler;
}

bool Action::is_finite() const {
  if (!finite(delta_root)) return false;
  return std::all_of(delta_joint_euler.begin(), delta_joint_euler.end(),
                     [](const Vec3& v) { return finite(v); });
}

bool Action::operator==(const Action& o) const {
  return delta_root == o.delta_root && delta_joint_euler == o.delta_joint_euler;
}

ActionVec flatten_action(const Action& a) {
  ActionVec v{};
  v[0] = a.delta_root.x();
  v[1] = a.delta_root.y();
  v[2] = a.delta_root.z();
  for (int j = 0; j < kBodyJoints; ++j)
    for (int c = 0; c < 3; ++c) v[3 + 3 * j + c] = a.delta_joint_euler[j][c];
  return v;
}

Action unflatten_action(const ActionVec& v) {
  Action a;
  a.delta_root = Vec3(v[0], v[1], v[2]);
  for (int j = 0; j < kBodyJoints; ++j)
    a.delta_joint_euler[j] = Vec3(v[3 + 3 * j], v[4 + 3 * j], v[5 + 3 * j]);
  return a;
}

BodyPose apply_action(const BodyPose& p, const Action& a,
                      const JointLimits& limits) {
  require(p.is_finite(), ErrorCode::InvalidArgument,
          "apply_action: non-finite pose");
  require(a.is_finite(), ErrorCode::InvalidArgument,
          "apply_action: non-finite action");
  BodyPose out;
  out.root_translation = p.root_translation + a.delta_root;
  for (int j = 0; j < kBodyJoints; ++j)
    for (int c = 0; c < 3; ++c)
      out.joint_euler[j][c] = std::clamp(
          p.joint_euler[j][c] + a.delta_joint_euler[j][c], limits.lo,
          limits.hi);
  return out;
}

Action action_between(const BodyPose& p1, const BodyPose& p2) {
  Action a;
  a.delta_root = p2.root_translation - p1.root_translation;
  for (int j = 0; j < kBodyJoints; ++j)
    a.delta_joint_euler[j] = p2.joint_euler[j] - p1.joint_euler[j];
  return a;
}

FkResult forward_kinematics(const BodyPose& p, const SkeletonTopology& topo) {
  topo.validate();
  require(p.is_finite(), ErrorCode::InvalidArgument, "fk: non-finite pose");
  FkResult fk;
  fk.position[0] = p.root_translation;
  fk.rotation[0] = euler_to_matrix(p.joint_euler[0]);
  for (int j = 1; j < topo.joint_count; ++j) {
    int parent = topo.parent_index[j];
    fk.position[j] = fk.position[parent] + fk.rotation[parent] * topo.rest_offset[j];
    fk.rotation[j] = fk.rotation[parent] * euler_to_matrix(p.joint_euler[j]);
  }
  const Vec3& head = fk.position[topo.head_index];
  const Mat3& head_rot = fk.rotation[topo.head_index];
  fk.eye_left = head + head_rot * topo.eye_offset_left;
  fk.eye_right = head + head_rot * topo.eye_offset_right;
  fk.neck = fk.position[topo.neck_index];
  return fk;
}

void JointMap::validate() const {
  std::set<int> torso{l5, l3, t12, t8};
  require(torso.size() == 4, ErrorCode::InvalidArgument,
          "joint map: torso indices must be distinct");
  for (int i : torso)
    require(i >= 0 && i < kXsensJoints, ErrorCode::InvalidArgument,
            "joint map: torso index out of range");
  std::set<int> spine(spine_targets.begin(), spine_targets.end());
  require(spine.size() == 3, ErrorCode::InvalidArgument,
          "joint map: spine targets must be distinct");
  for (int i : spine)
    require(i >= 0 && i < kBodyJoints, ErrorCode::InvalidArgument,
            "joint map: spine target out of range");

  std::set<int> suit_used(torso);
  std::set<int> body_used(spine);
  for (auto [suit, body] : pairs) {
    require(suit >= 0 && suit < kXsensJoints && body >= 0 && body < kBodyJoints,
            ErrorCode::InvalidArgument, "joint map: pair index out of range");
    require(!torso.count(suit), ErrorCode::InvalidArgument,
            "joint map: torso joint appears in the pair table");
    require(suit_used.insert(suit).second, ErrorCode::InvalidArgument,
            "joint map: suit joint mapped twice");
    require(body_used.insert(body).second, ErrorCode::InvalidArgument,
            "joint map: body joint mapped twice");
  }
  // All 23 suit joints accounted for (4 torso + 19 pairs), every body joint
  // produced exactly once.
  require(static_cast<int>(suit_used.size()) == kXsensJoints &&
              static_cast<int>(pairs.size()) == kXsensJoints - 4,
          ErrorCode::InvalidArgument,
          "joint map: table must cover all non-torso suit joints");
  require(static_cast<int>(body_used.size()) == kBodyJoints,
          ErrorCode::InvalidArgument,
          "joint map: table must cover all body joints");
}

const JointMap& default_joint_map() {
  static const JointMap map = [] {
    JointMap m;
    // Suit segment order: 0 pelvis, 1 L5, 2 L3, 3 T12, 4 T8, 5 neck,
    // 6 head, 7-10 right arm chain, 11-14 left arm chain, 15-18 right leg,
    // 19-22 left leg.
    m.pairs = {
        {0, 0},    // pelvis
        {5, 12},   // neck
        {6, 15},   // head
        {7, 14},   // shoulder -> collar
        {8, 17}, {9, 19}, {10, 21},   // right arm
        {11, 13},
        {12, 16}, {13, 18}, {14, 20}, // left arm
        {15, 2}, {16, 5}, {17, 8}, {18, 11},   // right leg
        {19, 1}, {20, 4}, {21, 7}, {22, 10},   // left leg
    };
    m.validate();
    return m;
  }();
  return map;
}

JointMap load_joint_map(const std::string& path) {
  JointMap m;
  m.pairs.clear();
  bool have_spine = false;
  for (const auto& toks : read_stanzas(path, "ewm-jointmap")) {
    const std::string& key = toks[0];
    if (key == "l5") m.l5 = to_int(toks.at(1));
    else if (key == "l3") m.l3 = to_int(toks.at(1));
    else if (key == "t12") m.t12 = to_int(toks.at(1));
    else if (key == "t8") m.t8 = to_int(toks.at(1));
    else if (key == "spine_targets") {
      require(toks.size() == 4, ErrorCode::ParseError,
              path + ": spine_targets needs 3 indices");
      m.spine_targets = {to_int(toks[1]), to_int(toks[2]), to_int(toks[3])};
      have_spine = true;
    } else if (key == "map") {
      require(toks.size() == 3, ErrorCode::ParseError,
              path + ": map line needs suit body");
      m.pairs.emplace_back(to_int(toks[1]), to_int(toks[2]));
    } else {
      throw Error(ErrorCode::ParseError, path + ": unknown key '" + key + "'");
    }
  }
  require(have_spine, ErrorCode::ParseError, path + ": missing spine_targets");
  m.validate();
  return m;
}

void save_joint_map(const JointMap& map, const std::string& path) {
  map.validate();
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot open for write: " + path);
  out << "ewm-jointmap\nformat_version 1\n"
      << "l5 " << map.l5 << "\nl3 " << map.l3 << "\nt12 " << map.t12
      << "\nt8 " << map.t8 << "\nspine_targets " << map.spine_targets[0]
      << " " << map.spine_targets[1] << " " << map.spine_targets[2]
      << "\n# map <suit> <body>\n";
  for (auto [suit, body] : map.pairs)
    out << "map " << suit << " " << body << "\n";
  require(out.good(), ErrorCode::IoError, "short write: " + path);
}

BodyPose xsens_to_smpl(const XsensPose& x, const JointMap& map) {
  map.validate();
  BodyPose p;
  p.root_translation = x.root_translation;
  p.joint_euler[map.spine_targets[0]] = x.joint_euler[map.l5];
  p.joint_euler[map.spine_targets[1]] = x.joint_euler[map.t12];
  p.joint_euler[map.spine_targets[2]] = x.joint_euler[map.t8];
  for (auto [suit, body] : map.pairs) p.joint_euler[body] = x.joint_euler[suit];
  return p;
}

XsensPose smpl_to_xsens(const BodyPose& p, const JointMap& map) {
  map.validate();
  XsensPose x;
  x.root_translation = p.root_translation;
  x.joint_euler[map.l5] = p.joint_euler[map.spine_targets[0]];
  x.joint_euler[map.t12] = p.joint_euler[map.spine_targets[1]];
  x.joint_euler[map.t8] = p.joint_euler[map.spine_targets[2]];
  x.joint_euler[map.l3] = p.joint_euler[map.spine_targets[0]];  // duplicated lumbar
  for (auto [suit, body] : map.pairs) x.joint_euler[suit] = p.joint_euler[body];
  return x;
}

}  // namespace ewm::kin
