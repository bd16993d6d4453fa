const BASE = 'https://print.yinxiang.example.com';

Page({
  data: { images: [] },

  onLoad() {
    const sys = wx.getSystemInfoSync();
    wx.request({
      url: BASE + '/session',
      header: { 'X-Device': sys.model + '/' + sys.system },
      success: (res) => {
        this.token = res.data.token;
      },
    });
  },

  pick() {
    wx.chooseImage({
      count: 9,
      sizeType: ['original'],
      success: (res) => {
        this.setData({ images: res.tempFilePaths });
        res.tempFilePaths.forEach((p) => this.upload(p));
      },
    });
  },

  upload(path) {
    wx.uploadFile({
      url: BASE + '/upload',
      filePath: path,
      name: 'photo',
      formData: { token: this.token },
    });
  },
});
