'''
ASCII exports of shell geometry: Wavefront OBJ and legacy VTK.

Coordinates are written with 17 significant digits, enough to read
back the same doubles. The quads are the control grid of the spline
surface.
'''
import logging

import numpy as np

from nrepshell.exceptions import MeshError

log = logging.getLogger(__name__)

FMT = '%.17g'


def _check(mesh, coords, name='coords'):
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (mesh.nvertices, 3):
        raise MeshError('%s must be (%i, 3), got %s'
                        % (name, mesh.nvertices, coords.shape))
    return coords


def _fmt(row):
    return ' '.join(FMT % x for x in row)


def write_obj(path, mesh, coords, comment=None):
    '''
    Write vertices and quad faces, OBJ indices are 1-based.
    '''
    coords = _check(mesh, coords)
    with open(path, 'w') as f:
        if comment:
            f.write('# %s\n' % comment)
        for row in coords:
            f.write('v %s\n' % _fmt(row))
        for quad in mesh.elements:
            f.write('f %s\n' % ' '.join(str(i + 1) for i in quad))
    log.debug('wrote %s', path)


def write_vtk(path, mesh, coords, displacement=None, title='nrepshell'):
    '''
    Write a legacy VTK POLYDATA file, optionally with the vertex
    displacements as POINT_DATA vectors named `displacement`.
    '''
    coords = _check(mesh, coords)
    with open(path, 'w') as f:
        f.write('# vtk DataFile Version 3.0\n')
        f.write('%s\n' % title)
        f.write('ASCII\n')
        f.write('DATASET POLYDATA\n')
        f.write('POINTS %i double\n' % len(coords))
        for row in coords:
            f.write('%s\n' % _fmt(row))
        ne = mesh.nelements
        f.write('POLYGONS %i %i\n' % (ne, ne * 5))
        for quad in mesh.elements:
            f.write('4 %s\n' % ' '.join(str(i) for i in quad))
        if displacement is not None:
            displacement = _check(mesh, displacement, 'displacement')
            f.write('POINT_DATA %i\n' % len(coords))
            f.write('VECTORS displacement double\n')
            for row in displacement:
                f.write('%s\n' % _fmt(row))
    log.debug('wrote %s', path)


def read_obj(path):
    '''
    Read back vertices (n, 3) and faces (m, k), 0-based.
    '''
    vertices = []
    faces = []
    with open(path, 'r') as f:
        for line in f:
            items = line.split()
            if not items or items[0].startswith('#'):
                continue
            if items[0] == 'v':
                vertices.append([float(x) for x in items[1:4]])
            elif items[0] == 'f':
                faces.append([int(x.split('/')[0]) - 1 for x in items[1:]])
    return np.array(vertices), np.array(faces, dtype=np.int64)
