'''
Extended Kalman Filter fusing the odometry sources into one pose estimate.

State is (x, y, theta, v, omega): pose plus body twist, propagated by a
constant-velocity arc. Three measurement models correct it:

    scan_match_twist  (v, omega) from laser odometry
    imu_yaw_rate      omega from the gyro
    mcl_pose          (x, y, theta) from the particle filter

Every covariance write is symmetrized, and updates use the Joseph form so
the result stays PSD. A measurement whose Mahalanobis distance exceeds the
chi-square 0.999 quantile for its dimension is rejected and the state is
returned untouched.

The navigation filter resets its pose to the particle filter once too many
pose fixes in a row have been rejected.
'''

from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from PyNav.Debug import DEBUG
from PyNav.Errors import InputDomainError
from PyNav.Geometry import Pose2D, Twist2D, arc_advance, arc_jacobian, wrap_angle

GATE_PROBABILITY = 0.999

# Rows of H for each measurement model, and which component is an angle.
MODELS = {
    'scan_match_twist': ([3, 4], None),
    'imu_yaw_rate': ([4], None),
    'mcl_pose': ([0, 1, 2], 2),
}


@dataclass(frozen = True, eq = False)
class EkfState:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype = float)
        mean[2] = wrap_angle(mean[2])
        cov = np.array(self.covariance, dtype = float)
        object.__setattr__(self, 'mean', mean)
        object.__setattr__(self, 'covariance', symmetrize(cov))

    @staticmethod
    def at(pose, twist = None, covariance = None):
        twist = twist or Twist2D()
        if covariance is None:
            covariance = np.zeros((5, 5))
        elif np.ndim(covariance) == 1:
            covariance = np.diag(covariance)
        return EkfState([pose.x, pose.y, pose.theta, twist.v, twist.omega], covariance)

    def pose(self):
        return Pose2D(self.mean[0], self.mean[1], self.mean[2])

    def twist(self):
        return Twist2D(self.mean[3], self.mean[4])


def symmetrize(matrix):
    return 0.5 * (matrix + matrix.T)


# Analytic Jacobian of the constant-velocity arc motion.
def motion_jacobian(mean, dt):
    jacobian = np.eye(5)
    jacobian[0:3, 2:5] = arc_jacobian(mean[2], mean[3], mean[4], dt)
    return jacobian


def motion_model(mean, dt):
    pose = arc_advance(Pose2D(mean[0], mean[1], mean[2]), mean[3], mean[4], dt)
    return np.array([pose.x, pose.y, pose.theta, mean[3], mean[4]])


def ekf_predict(state, dt, process_noise):
    if not dt > 0:
        raise InputDomainError('dt must be positive, got %r' % dt)

    jacobian = motion_jacobian(state.mean, dt)
    covariance = jacobian @ state.covariance @ jacobian.T + np.asarray(process_noise, dtype = float) * dt
    return EkfState(motion_model(state.mean, dt), covariance)


# Returns (new state, accepted). A gated measurement comes back with the
# input state and accepted False.
def ekf_update(state, z, model, R, gate = GATE_PROBABILITY):
    if model not in MODELS:
        raise InputDomainError('Unknown measurement model %r' % (model,))

    rows, angle = MODELS[model]
    z = np.atleast_1d(np.asarray(z, dtype = float))
    R = np.atleast_2d(np.asarray(R, dtype = float))
    if z.shape != (len(rows),) or R.shape != (len(rows), len(rows)):
        raise InputDomainError('Measurement dimension does not match model %s' % model)
    if np.linalg.eigvalsh(symmetrize(R)).min() < -1e-12:
        raise InputDomainError('Measurement covariance must be PSD')

    H = np.zeros((len(rows), 5))
    H[np.arange(len(rows)), rows] = 1.0

    innovation = z - state.mean[rows]
    if angle is not None:
        innovation[angle] = wrap_angle(innovation[angle])

    P = state.covariance
    S = symmetrize(H @ P @ H.T + R)
    S_inv = np.linalg.pinv(S)

    if gate is not None:
        distance = float(innovation @ S_inv @ innovation)
        if distance > chi2.ppf(gate, len(rows)):
            DEBUG.write('EKF rejected %s measurement (Mahalanobis %.2f)' % (model, distance))
            return state, False

    K = P @ H.T @ S_inv
    mean = state.mean + K @ innovation
    IKH = np.eye(5) - K @ H
    covariance = IKH @ P @ IKH.T + K @ R @ K.T

    return EkfState(mean, covariance), True


# The filter the navigation loop owns: holds the state and noise settings
# and counts what the gate threw away. After max_pose_rejections pose fixes
# in a row are gated out, the pose is reset to the next rejected fix.
class FusionFilter:
    def __init__(self, state, process_noise, r_twist, r_yaw_rate, r_pose, max_pose_rejections = None):
        self.state = state
        self.process_noise = np.diag(process_noise)
        self.r_twist = np.diag(r_twist)
        self.r_yaw_rate = np.array([[r_yaw_rate]])
        self.r_pose = np.diag(r_pose)
        self.max_pose_rejections = max_pose_rejections
        self.rejected = 0
        self.pose_rejections = 0
        self.resets = 0

    def predict(self, dt):
        self.state = ekf_predict(self.state, dt, self.process_noise)

    def _update(self, z, model, R):
        self.state, accepted = ekf_update(self.state, z, model, R)
        if not accepted:
            self.rejected += 1
        return accepted

    def update_twist(self, twist, covariance = None):
        R = self.r_twist if covariance is None else self.r_twist + covariance
        return self._update([twist.v, twist.omega], 'scan_match_twist', R)

    def update_yaw_rate(self, yaw_rate):
        return self._update([yaw_rate], 'imu_yaw_rate', self.r_yaw_rate)

    def update_pose(self, pose, covariance = None):
        R = self.r_pose if covariance is None else self.r_pose + covariance
        if self._update([pose.x, pose.y, pose.theta], 'mcl_pose', R):
            self.pose_rejections = 0
            return True

        self.pose_rejections += 1
        if self.max_pose_rejections and self.pose_rejections >= self.max_pose_rejections:
            DEBUG.warn('EKF gated out %d pose fixes in a row, resetting to (%.3f, %.3f, %.3f)' % (
                self.pose_rejections, pose.x, pose.y, pose.theta))
            self.reset_pose(pose, R)
        return False

    # Replaces the pose part of the state; the twist and its covariance stay.
    def reset_pose(self, pose, covariance):
        mean = self.state.mean.copy()
        mean[0:3] = [pose.x, pose.y, pose.theta]
        P = self.state.covariance.copy()
        P[0:3, :] = 0.0
        P[:, 0:3] = 0.0
        P[0:3, 0:3] = covariance
        self.state = EkfState(mean, P)
        self.pose_rejections = 0
        self.resets += 1
