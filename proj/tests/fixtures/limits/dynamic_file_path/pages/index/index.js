const AVATAR = `${wx.env.USER_DATA_PATH}/avatar.png`;

Page({
  pick() {
    wx.chooseImage({
      count: 1,
      success(res) {
        wx.getFileSystemManager().saveFile({ tempFilePath: res.tempFilePaths[0], filePath: AVATAR });
      },
    });
  },

  sync() {
    wx.uploadFile({ url: 'https://api.example.com/avatar', filePath: AVATAR, name: 'avatar' });
  },
});
