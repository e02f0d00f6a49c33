import { ApiClient } from './api';
import { App } from './render';

const root = document.getElementById('app');
if (root === null) {
  throw new Error('missing #app mount point');
}
new App(new ApiClient(''), root).start();
